#pragma once
// Adaptive Gauss-Kronrod 7/15 panel quadrature over finite intervals.
// Unbounded tails are handled one level up (jump_measure) in log
// coordinates, so everything here is finite-interval work.

#include <functional>
#include <vector>

#include "levy/common.hpp"

namespace levy::quad {

struct Options {
    double absTol = 1e-10;
    double relTol = 1e-8;
    int maxDepth = 52;
    long maxEvals = 4'000'000;
};

using Fn = std::function<double(double)>;

// One 15-point Kronrod panel on [a,b]; err is the |K15-G7| based estimate.
double gk15_panel(const Fn& f, double a, double b, double& err);

// Adaptive bisection until the per-panel error budget is met. Throws
// QuadratureDivergence if the budget cannot be met within maxDepth/maxEvals.
double adaptive_finite(const Fn& f, double a, double b, const Options& opt);

// Same, but force initial panel boundaries at the interior breakpoints
// (deduplicated, clipped to (a,b)).
double adaptive_with_breakpoints(const Fn& f, double a, double b,
                                 std::vector<double> breakpoints,
                                 const Options& opt);

}  // namespace levy::quad
