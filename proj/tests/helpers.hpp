#pragma once
// Shared builders for the unit tests: small canonical markets and fixture
// file access.

#include <string>

#include "levy/market_io.hpp"
#include "levy/triplet.hpp"

namespace testutil {

inline std::string fixture_path(const std::string& name) {
    const bool hasExt = name.size() >= 5 &&
                        name.compare(name.size() - 5, 5, ".json") == 0;
    return std::string(LEVYNFL_FIXTURE_DIR) + "/" + name +
           (hasExt ? "" : ".json");
}

inline levy::MarketSpecFile load_fixture(const std::string& name) {
    return levy::load_market_spec(fixture_path(name));
}

inline levy::Vec v1(double a) {
    levy::Vec v(1);
    v << a;
    return v;
}

inline levy::Vec v2(double a, double b) {
    levy::Vec v(2);
    v << a, b;
    return v;
}

// One risky asset, Brownian noise only.
inline levy::LevyTriplet bsm1(double b, double c) {
    levy::LevyTriplet t;
    t.dim = 1;
    t.b = v1(b);
    t.c = levy::Mat::Constant(1, 1, c);
    t.nu.dim = 1;
    return t;
}

// Pure-jump asset with one atom.
inline levy::LevyTriplet one_atom(double b, double x, double rate) {
    levy::LevyTriplet t;
    t.dim = 1;
    t.b = v1(b);
    t.c = levy::Mat::Zero(1, 1);
    t.nu.dim = 1;
    t.nu.atoms.push_back(levy::Atom{v1(x), rate});
    return t;
}

// Unit drift and jump density 1+x on (-1,1]: growth-optimal position 1.
inline levy::LevyTriplet affine_market() {
    levy::LevyTriplet t;
    t.dim = 1;
    t.b = v1(1.0);
    t.c = levy::Mat::Zero(1, 1);
    t.nu.dim = 1;
    levy::DensitySegment seg;
    seg.factors.push_back(levy::Family1D::polynomial({1.0, 1.0}, -1.0, 1.0));
    t.nu.segments.push_back(seg);
    return t;
}

// Uniform body plus the heavy positive tail 1/(x log^2(1+x)) on [1, inf).
inline levy::LevyTriplet heavy_log_tail_market() {
    levy::LevyTriplet t;
    t.dim = 1;
    t.b = v1(0.0);
    t.c = levy::Mat::Zero(1, 1);
    t.nu.dim = 1;
    levy::DensitySegment body;
    body.factors.push_back(levy::Family1D::polynomial({1.0}, -1.0, 1.0));
    t.nu.segments.push_back(body);
    levy::DensitySegment tail;
    tail.factors.push_back(levy::Family1D::power_log(2.0, 1.0, 1.0, 1));
    t.nu.segments.push_back(tail);
    return t;
}

}  // namespace testutil
