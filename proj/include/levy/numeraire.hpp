#pragma once

#include <vector>

#include "levy/arbitrage.hpp"
#include "levy/constraints.hpp"

namespace levy {

// Growth rate of the log-wealth of a constant-proportion portfolio:
//   g(pi) = pi'b - pi'c pi / 2 + int (log(1 + pi'x) - pi'x 1_{|x|<=1}) nu(dx).
// Minus infinity when jumps can wipe out the position; plus infinity (tagged)
// only when nu does not integrate the log and pi rides the heavy tail.
ExtReal growth_rate(const LevyTriplet& trip, const Vec& pi,
                    const quad::Options& opt = {});

// Directional derivative of g at pi in direction d:
//   d'b - d'c pi + int (d'x / (1 + pi'x) - d'x 1_{|x|<=1}) nu(dx).
// Equals rel_rate(pi + d | pi). Divergence at the natural-constraint
// boundary comes back as a tagged infinity with the sign of the exposure.
ExtReal growth_rate_derivative(const LevyTriplet& trip, const Vec& pi,
                               const Vec& d, const quad::Options& opt = {});

// Relative rate of return of pi against rho: log E[W^pi_T / W^rho_T] / T.
ExtReal rel_rate(const LevyTriplet& trip, const Vec& pi, const Vec& rho,
                 const quad::Options& opt = {});

struct ApproxStep {
    int n = 0;
    Vec rho;
    double growth = 0.0;
};

struct NumeraireResult {
    Vec rho;
    ExtReal growthRate = ExtReal::finite(0.0);
    double kktResidual = 0.0;
    std::vector<ApproxStep> approxTrace;  // nonempty when the scheme ran
    bool extrapolated = false;  // scheme hit its cap; rho is the fitted limit
    long iterations = 0;
    double finalStep = 0.0;
    std::vector<std::string> notes;
};

// Numeraire portfolio rho = argmax g over C intersected with the null-perp
// space; runs the tail-lightening approximation scheme when nu does not
// integrate the log. Throws IaoPresent when no numeraire can exist.
NumeraireResult solve_numeraire(const LevyTriplet& trip, const ConstraintSet& C,
                                const quad::Options& opt = {});

struct VerifyOptions {
    int quasiRandomPoints = 1000;
    bool parallel = true;  // OpenMP sweep; serial path kept as the reference
};

// Max of rel_rate(pi | rho) over a deterministic verification sample of
// C intersected with the natural constraints (vertices, rays, quasi-random
// interior points, boundary probes). Nonpositive up to tolerance certifies
// the numeraire property: no competing portfolio has a positive relative rate.
double verify_numeraire(const LevyTriplet& trip, const ConstraintSet& C,
                        const Vec& rho, const quad::Options& opt = {},
                        const VerifyOptions& vopt = {});

// Analytic log E[W^pi_T / W^rho_T] versus the Monte Carlo mean of
// log(W^pi_T / W^rho_T) for sample portfolios (implemented with the path
// engine; declared here because it certifies the numeraire).
struct LogOptimalityEntry {
    Vec pi;
    double analyticLogExpectation = 0.0;  // T * rel(pi | rho)
    double mcLogMean = 0.0;
    double mcLogStdErr = 0.0;
    bool jensenOrdered = false;  // analytic >= mc mean - 3 se
    bool nonPositive = false;    // both quantities <= tolerance
};
struct LogOptimalityReport {
    std::vector<LogOptimalityEntry> entries;
    bool allOrdered = false;
    bool allNonPositive = false;
};
LogOptimalityReport log_optimality_gap(const LevyTriplet& trip,
                                       const ConstraintSet& C, const Vec& rho,
                                       double T, unsigned long long seed,
                                       int paths,
                                       const quad::Options& opt = {});

}  // namespace levy
