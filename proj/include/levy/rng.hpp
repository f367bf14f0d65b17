#pragma once

#include <cstdint>

namespace levy::rng {

// Generator family identifier recorded in every simulation report. The
// generator is counter-based: output block k of stream s under seed q is a
// pure function of (q, s, k), so paths can be generated in any order — or in
// parallel — with identical results.
inline constexpr const char* kFamily = "philox4x32-10";

class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t streamId)
        : seed_(seed), stream_(streamId) {}

    std::uint32_t next_u32();

    // 53-bit uniform on the open interval (0, 1); never 0 or 1, so logs and
    // Box-Muller are safe.
    double uniform();

    // Standard Gaussian via Box-Muller (pairs cached per stream).
    double normal();

    // Exponential waiting time with the given rate.
    double exponential(double rate);

private:
    void refill();

    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::uint64_t counter_ = 0;
    std::uint32_t buf_[4] = {0, 0, 0, 0};
    int idx_ = 4;
    bool haveSpare_ = false;
    double spare_ = 0.0;
};

}  // namespace levy::rng
