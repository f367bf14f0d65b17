#pragma once
// Monte Carlo path engine: drift + Gaussian + compound-Poisson sampling of
// the log-price process, stochastic-exponential wealth paths, and the
// statistical verdicts that cross-check the analytic modules.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "levy/constraints.hpp"
#include "levy/esscher.hpp"
#include "levy/rng.hpp"
#include "levy/triplet.hpp"

namespace levy {

struct PathJump {
    int gridIndex = 0;  // the jump happens at times[gridIndex] (always > 0)
    double time = 0.0;
    Vec x;
};

struct SimPath {
    // Grid 0 = times[0] < ... < times[m] = T: the uniform grid with every
    // jump time inserted exactly. incs is m x dim row-major; row i is
    // X(times[i+1]) - X(times[i]), so partial sums reconstruct X from X0 = 0.
    std::vector<double> times;
    std::vector<double> incs;
    std::vector<PathJump> jumps;  // ordered by time; entries sharing a grid
                                  // point are distinct jumps applied in order

    int intervals() const { return static_cast<int>(times.size()) - 1; }
};

struct PathBundle {
    int dim = 1;
    double T = 1.0;
    int nSteps = 1;
    double epsilon = 1e-3;
    std::uint64_t seed = 0;
    std::string rngFamily;
    std::vector<SimPath> paths;  // index == rng stream id
    std::vector<std::string> notes;
};

struct SimOptions {
    // One-asset density jumps below this size are dropped and compensated in
    // the drift; exact atoms and bounded multi-asset boxes are never dropped.
    double epsilon = 1e-3;
    bool parallel = true;  // OpenMP over paths; the serial loop is the reference
};

// Exact-jump-time simulation: atoms by thinned Poisson arrivals, density
// segments by rejection sampling from their family envelopes, the Gaussian
// part via the PSD square root of c. Bit-identical for a fixed seed whether
// run serially or in parallel (one counter-based stream per path).
PathBundle sample_paths(const LevyTriplet& trip, double T, int nSteps,
                        int nPaths, std::uint64_t seed,
                        const SimOptions& opt = {},
                        const quad::Options& qopt = {});

struct StopPolicy {
    bool active = false;
    double level = 0.0;
    static StopPolicy none() { return {}; }
    static StopPolicy when_wealth_exceeds(double m) {
        return StopPolicy{true, m};
    }
};

// Wealth of the constant-proportion portfolio pi along each path: between
// jumps multiply by exp(pi . (continuous increment) - pi'c pi dt / 2), at a
// jump by (1 + pi . dx). One value per grid point, W(0) = 1. An active stop
// policy switches the position to zero once the level is reached, freezing
// the wealth there.
std::vector<std::vector<double>> wealth_path(
    const LevyTriplet& trip, const PathBundle& bundle, const Vec& pi,
    const StopPolicy& policy = StopPolicy::none());

struct SimulationReport {
    std::string statistic;
    double estimate = 0.0;
    double stdError = 0.0;
    bool consistent = true;  // violated only beyond 3 standard errors
    long sampleSize = 0;
    std::uint64_t seed = 0;
    std::string rngFamily;
    std::map<std::string, double> details;
    std::vector<std::string> notes;
};

// E[numerator/denominator terminal ratio] <= 1 within 3 standard errors, at
// the horizon and at the T/2 and T/4 checkpoints. Paths must come from the
// same bundle (shared grid and seed pairing).
SimulationReport supermartingale_test(
    const PathBundle& bundle, const std::vector<std::vector<double>>& numerator,
    const std::vector<std::vector<double>>& denominator);

// Certify xi as a never-losing direction, then demonstrate it: every
// simulated wealth path must be nondecreasing (exact grid + jump check;
// a violation throws, indicating an engine bug), and the fraction ending
// strictly above 1 is reported.
SimulationReport increasing_profit_demo(const LevyTriplet& trip, const Vec& xi,
                                        double T, int nPaths,
                                        std::uint64_t seed,
                                        const SimOptions& opt = {},
                                        const quad::Options& qopt = {});

// Run the growth-optimal portfolio with a stop-at-level policy over an
// adaptive horizon (powers of two up to 4096) until 99% of paths reach the
// level. Refuses (InvariantViolation) when the law is already a
// supermartingale measure for C; throws HorizonCapReached with partial
// statistics when the cap is hit first.
SimulationReport infinite_horizon_free_lunch_demo(const LevyTriplet& trip,
                                                  const ConstraintSet& C,
                                                  double level,
                                                  std::uint64_t seed,
                                                  int nPaths = 2000,
                                                  const SimOptions& opt = {},
                                                  const quad::Options& qopt = {});

// Empirical mean of the exponential-tilt density
//   Z_T = exp(-eta . X_T - sum g(jumps) - T psi)
// computed pathwise on paths of the *original* law; consistent when the mean
// is within 3 standard errors of 1.
SimulationReport esscher_martingale_check(const LevyTriplet& trip,
                                          const EsscherParams& params, double T,
                                          int nPaths, std::uint64_t seed,
                                          const SimOptions& opt = {},
                                          const quad::Options& qopt = {});

}  // namespace levy
