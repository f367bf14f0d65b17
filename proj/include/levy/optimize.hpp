#pragma once

#include <functional>

#include "levy/common.hpp"

namespace levy::opt {

struct Options {
    double initialStep = 1.0;
    double armijo = 1e-4;       // sufficient-increase fraction
    double stepFloor = 1e-10;   // moves below this count as stalls
    double gradTol = 1e-10;     // projected-gradient convergence threshold
    int stallLimit = 2;         // consecutive stalls that mean convergence
    int polishIter = 200;       // gradient-norm descent steps after the stall
    long maxIter = 100000;
};

struct Result {
    Vec x;
    double value = 0.0;
    long iterations = 0;
    double finalStep = 0.0;
    bool converged = false;
};

// Projected gradient ascent with Armijo backtracking and step doubling on
// acceptance. `project` maps any point into the feasible set; `admissible`
// guards objective evaluation (points failing it are treated as -infinity,
// which realizes barrier-type constraints such as staying strictly inside
// the natural constraints). The start must be admissible after projection.
Result maximize(const std::function<double(const Vec&)>& value,
                const std::function<Vec(const Vec&)>& gradient,
                const std::function<Vec(const Vec&)>& project,
                const std::function<bool(const Vec&)>& admissible,
                const Vec& start, const Options& o = {});

}  // namespace levy::opt
