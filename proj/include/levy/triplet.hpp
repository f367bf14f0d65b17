#pragma once

#include "levy/jump_measure.hpp"

namespace levy {

// Characteristics (b, c, nu) of an exponential Levy market with d assets,
// stated relative to the truncation |x| <= 1: drift b, Gaussian covariance
// c, and jump measure nu. Log-price increments over time t have cumulant
// t * phi(u) with phi as in char_exponent().
struct LevyTriplet {
    int dim = 0;
    Vec b;
    Mat c;
    JumpMeasure nu;

    // Structural validation: shapes agree, c is symmetric positive
    // semidefinite, and nu is a genuine Levy measure.
    void validate() const;
};

}  // namespace levy
