#include "levy/rng.hpp"

#include <cmath>

namespace levy::rng {
namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

void Stream::refill() {
    std::uint32_t c0 = static_cast<std::uint32_t>(counter_);
    std::uint32_t c1 = static_cast<std::uint32_t>(counter_ >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(stream_);
    std::uint32_t c3 = static_cast<std::uint32_t>(stream_ >> 32);
    std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);

    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c0, hi0, lo0);
        mulhilo(kM1, c2, hi1, lo1);
        const std::uint32_t n0 = hi1 ^ c1 ^ k0;
        const std::uint32_t n1 = lo1;
        const std::uint32_t n2 = hi0 ^ c3 ^ k1;
        const std::uint32_t n3 = lo0;
        c0 = n0;
        c1 = n1;
        c2 = n2;
        c3 = n3;
        k0 += kW0;
        k1 += kW1;
    }

    buf_[0] = c0;
    buf_[1] = c1;
    buf_[2] = c2;
    buf_[3] = c3;
    ++counter_;
    idx_ = 0;
}

std::uint32_t Stream::next_u32() {
    if (idx_ >= 4) refill();
    return buf_[idx_++];
}

double Stream::uniform() {
    const std::uint32_t a = next_u32();
    const std::uint32_t b = next_u32();
    // 27 high bits of a and 26 high bits of b give a 53-bit mantissa; the
    // half-unit offset keeps the result strictly inside (0, 1).
    const double hi = static_cast<double>(a >> 5) * 67108864.0;  // * 2^26
    const double lo = static_cast<double>(b >> 6);
    return (hi + lo + 0.5) * (1.0 / 9007199254740992.0);  // / 2^53
}

double Stream::normal() {
    if (haveSpare_) {
        haveSpare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double ang = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(ang);
    haveSpare_ = true;
    return r * std::cos(ang);
}

double Stream::exponential(double rate) {
    return -std::log(uniform()) / rate;
}

}  // namespace levy::rng
