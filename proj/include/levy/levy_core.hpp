#pragma once

#include <complex>

#include "levy/triplet.hpp"

namespace levy {

// Levy-Khintchine exponent phi(u) with truncation |x| <= 1, so that the
// log-price increment over time t has characteristic function exp(t*phi(u)).
std::complex<double> char_exponent(const LevyTriplet& trip, const Vec& u,
                                   const quad::Options& opt = {});

// b + integral of x 1_{|x|>1} nu(dx), with honest reporting when a tail
// fails to have a first moment.
struct MeanRate {
    bool integrable = true;
    Vec value;                // defined only when integrable
    std::string divergentTail;  // human-readable culprit otherwise
};
MeanRate mean_rate(const LevyTriplet& trip, const quad::Options& opt = {});

// log E[exp(u * L_1)] for a one-asset market, as an extended real:
// u*b + u^2 c / 2 + integral of (e^{ux} - 1 - ux 1_{|x|<=1}) nu(dx).
// Returns +infinity when the exponential moment does not exist.
ExtReal log_exp_moment(const LevyTriplet& trip, double u,
                       const quad::Options& opt = {});

// Whether log(1+|x|) 1_{|x|>1} is nu-integrable (needed for finite growth
// rates in markets with heavy tails).
bool integrates_log(const JumpMeasure& nu);

// Lightened measure nu_n = f_n(|x|) nu with f_n = 1 on |x|<=1 and
// |x|^{-1/n} outside; approximates nu from below as n grows.
JumpMeasure approximate(const JumpMeasure& nu, int n);

// Total nu-mass of {|x| > eps}; finite for every Levy measure when eps > 0.
double total_mass_above(const JumpMeasure& nu, double eps,
                        const quad::Options& opt = {});

// integral of x 1_{|x|<=1} nu(dx): the compensator of small jumps relative
// to the |x| <= 1 truncation.
Vec truncated_jump_mean(const JumpMeasure& nu, const quad::Options& opt = {});

}  // namespace levy
