#pragma once

#include "levy/arbitrage.hpp"
#include "levy/constraints.hpp"

namespace levy {

// Parameters of the exponential tilt Z_t = exp(-eta'X_t - sum g(jumps) - t*psi):
// the structure-preserving density process between equivalent measures.
struct EsscherParams {
    Vec eta;
    GTag g = GTag::Zero;
    double psi = 0.0;
};

// Martingale normalizer: psi(eta, g) = -eta'b + eta'c eta / 2
//   + int (e^{-eta'x - g(x)} - 1 + eta'x 1_{|x|<=1}) nu(dx).
double psi(const LevyTriplet& trip, const Vec& eta, GTag g,
           const quad::Options& opt = {});

// Characteristics under the tilted measure: c unchanged, nu reweighted by
// e^{-eta'x - g(x)}, drift shifted by -c eta plus the small-jump correction.
struct TransformedTriplet {
    LevyTriplet triplet;
    EsscherParams params;
};
TransformedTriplet transform_triplet(const LevyTriplet& trip,
                                     const EsscherParams& params,
                                     const quad::Options& opt = {});

// Drift condition making the current measure a supermartingale measure for
// the C-constrained market: ell(p) <= 0 for all p in C intersected with the
// natural constraints. Checked over generators, vertices, and a direction
// grid; a divergent positive tail counts as a violation.
struct SupermartingaleVerdict {
    bool holds = true;
    Vec worstDirection;
    std::string worstValue;  // stringified extended real
    int directionsChecked = 0;
};
SupermartingaleVerdict is_supermartingale_measure(const LevyTriplet& trip,
                                                  const ConstraintSet& C,
                                                  const quad::Options& opt = {});

// Equivalent supermartingale *measure* construction over a cone: lighten the
// tails with the quadratic g, then minimize psi over the cone by projected
// gradient. Absence of immediate arbitrage guarantees a finite minimizer.
struct EsmmResult {
    bool found = false;
    EsscherParams params;       // with g = quadraticTail when found
    IaoSearch witness;          // the blocking arbitrage when not found
    bool meanRateZero = false;  // true when the result is EMM-grade
    Vec transformedMeanRate;
    std::string note;
};
EsmmResult find_esmm(const LevyTriplet& trip, const ConstraintSet& cone,
                     double T, const quad::Options& opt = {});

// Completeness of the unconstrained market (jump support inside ker c, at
// most dim(ker c) jump points, and no immediate arbitrage).
struct CompletenessVerdict {
    bool complete = false;
    std::string reason;  // "", infiniteSupport, supportOutsideKernel,
                         // tooManyJumpPoints, arbitrageCondition
    int kernelDim = 0;
};
CompletenessVerdict check_completeness(const LevyTriplet& trip,
                                       const ConstraintSet& C,
                                       const quad::Options& opt = {});

}  // namespace levy
