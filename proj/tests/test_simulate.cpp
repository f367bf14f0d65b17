#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "levy/common.hpp"
#include "levy/constraints.hpp"
#include "levy/numeraire.hpp"
#include "levy/report.hpp"
#include "levy/rng.hpp"
#include "levy/simulate.hpp"

using namespace levy;
using testutil::v1;
using testutil::v2;

TEST_CASE("uniform stream stays in (0,1) with the right mean") {
    rng::Stream s(12345, 0);
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    // SE of the mean is 1/sqrt(12 n) ~ 0.002.
    CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("normal and exponential moments") {
    rng::Stream s(999, 3);
    const int n = 20000;
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        m1 += z;
        m2 += z * z;
    }
    CHECK(std::abs(m1 / n) < 0.03);            // ~4 SE
    CHECK(std::abs(m2 / n - 1.0) < 0.05);

    rng::Stream e(999, 4);
    double esum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = e.exponential(2.0);
        CHECK(w > 0.0);
        esum += w;
    }
    CHECK(std::abs(esum / n - 0.5) < 0.02);
}

TEST_CASE("streams are deterministic and distinct") {
    rng::Stream a(7, 11), b(7, 11), c(7, 12), d(8, 11);
    bool allSameC = true, allSameD = true;
    for (int i = 0; i < 64; ++i) {
        const std::uint32_t ra = a.next_u32();
        CHECK(ra == b.next_u32());
        allSameC = allSameC && (ra == c.next_u32());
        allSameD = allSameD && (ra == d.next_u32());
    }
    CHECK(!allSameC);  // different stream id diverges
    CHECK(!allSameD);  // different seed diverges
}

TEST_CASE("serial and parallel path generation are bit-identical") {
    const LevyTriplet trip = testutil::affine_market();
    SimOptions serial;
    serial.parallel = false;
    SimOptions parallel;
    parallel.parallel = true;

    const PathBundle s = sample_paths(trip, 1.0, 16, 64, 2024, serial);
    const PathBundle p = sample_paths(trip, 1.0, 16, 64, 2024, parallel);
    REQUIRE(s.paths.size() == p.paths.size());
    for (size_t i = 0; i < s.paths.size(); ++i) {
        CHECK(s.paths[i].times == p.paths[i].times);
        CHECK(s.paths[i].incs == p.paths[i].incs);
        REQUIRE(s.paths[i].jumps.size() == p.paths[i].jumps.size());
        for (size_t j = 0; j < s.paths[i].jumps.size(); ++j) {
            CHECK(s.paths[i].jumps[j].time == p.paths[i].jumps[j].time);
            CHECK(s.paths[i].jumps[j].x(0) == p.paths[i].jumps[j].x(0));
        }
    }
}

TEST_CASE("atom arrivals have the right jump count on average") {
    // Poisson(lambda T) with lambda = 2, T = 1.5.
    const LevyTriplet trip = testutil::one_atom(0.0, 0.5, 2.0);
    const int nPaths = 4000;
    const PathBundle bundle = sample_paths(trip, 1.5, 8, nPaths, 5);
    double total = 0.0;
    for (const SimPath& path : bundle.paths) total += path.jumps.size();
    const double mean = total / nPaths;
    const double expect = 2.0 * 1.5;
    const double se = std::sqrt(expect / nPaths);
    CHECK(std::abs(mean - expect) < 4 * se);

    // Jump times must sit inside (0, T] and on the grid.
    for (const SimPath& path : bundle.paths) {
        for (const PathJump& jump : path.jumps) {
            CHECK(jump.time > 0.0);
            CHECK(jump.time <= 1.5);
            CHECK(jump.gridIndex > 0);
            CHECK(path.times[jump.gridIndex] == doctest::Approx(jump.time));
        }
    }
}

TEST_CASE("pathwise wealth identity for a compensated single atom") {
    // b = 0, one atom at -0.5 with rate 5: between jumps X drifts upward at
    // the compensator rate 2.5, each jump multiplies wealth (pi = 1) by 1/2.
    // Hence W_T * 2^N = e^{2.5 T} exactly, path by path.
    LevyTriplet trip;
    trip.dim = 1;
    trip.b = v1(0.0);
    trip.c = Mat::Zero(1, 1);
    trip.nu = JumpMeasure{};
    trip.nu.dim = 1;
    trip.nu.atoms.push_back(Atom{v1(-0.5), 5.0});

    const double T = 1.0;
    const PathBundle bundle = sample_paths(trip, T, 8, 50, 77);
    const std::vector<std::vector<double>> W =
        wealth_path(trip, bundle, v1(1.0));
    REQUIRE(W.size() == bundle.paths.size());
    for (size_t i = 0; i < W.size(); ++i) {
        const double terminal = W[i].back();
        const double n = static_cast<double>(bundle.paths[i].jumps.size());
        CHECK(terminal * std::pow(2.0, n) ==
              doctest::Approx(std::exp(2.5 * T)).epsilon(1e-9));
    }
}

TEST_CASE("diffusion terminal log-wealth matches its analytic mean") {
    const double b = 0.08, c = 0.16, pi = 0.5, T = 2.0;
    const LevyTriplet trip = testutil::bsm1(b, c);
    const int nPaths = 20000;
    const PathBundle bundle = sample_paths(trip, T, 4, nPaths, 31);
    const std::vector<std::vector<double>> W =
        wealth_path(trip, bundle, v1(pi));
    double sum = 0.0, sumSq = 0.0;
    for (const std::vector<double>& path : W) {
        const double logw = std::log(path.back());
        sum += logw;
        sumSq += logw * logw;
    }
    const double mean = sum / nPaths;
    const double var = sumSq / nPaths - mean * mean;
    const double se = std::sqrt(var / nPaths);
    const double expect = (pi * b - 0.5 * pi * pi * c) * T;
    CHECK(std::abs(mean - expect) < 3.5 * se);
}

TEST_CASE("dropped small jumps are compensated consistently") {
    // Halving epsilon must not move the mean of X_T beyond noise.
    const LevyTriplet trip = testutil::affine_market();
    const int nPaths = 8000;
    SimOptions coarse;
    coarse.epsilon = 2e-2;
    SimOptions fine;
    fine.epsilon = 1e-2;

    double means[2], ses[2];
    const SimOptions* opts[2] = {&coarse, &fine};
    for (int k = 0; k < 2; ++k) {
        const PathBundle bundle = sample_paths(trip, 1.0, 8, nPaths, 404, *opts[k]);
        double sum = 0.0, sumSq = 0.0;
        for (const SimPath& path : bundle.paths) {
            double x = 0.0;
            for (const double inc : path.incs) x += inc;
            sum += x;
            sumSq += x * x;
        }
        means[k] = sum / nPaths;
        const double var = sumSq / nPaths - means[k] * means[k];
        ses[k] = std::sqrt(var / nPaths);
    }
    const double se = std::hypot(ses[0], ses[1]);
    CHECK(std::abs(means[0] - means[1]) < 4 * se);
}

TEST_CASE("empty market produces frozen paths") {
    LevyTriplet trip;
    trip.dim = 1;
    trip.b = v1(0.0);
    trip.c = Mat::Zero(1, 1);
    trip.nu = JumpMeasure{};
    trip.nu.dim = 1;
    const PathBundle bundle = sample_paths(trip, 1.0, 4, 10, 1);
    for (const SimPath& path : bundle.paths) {
        CHECK(path.jumps.empty());
        for (const double inc : path.incs) CHECK(inc == 0.0);
    }
}

TEST_CASE("supermartingale test accepts a fair ratio and flags a rigged one") {
    const LevyTriplet trip = testutil::bsm1(0.08, 0.16);
    const PathBundle bundle = sample_paths(trip, 1.0, 16, 4000, 2025);
    const NumeraireResult num =
        solve_numeraire(trip, ConstraintSet::full_space(1));
    const std::vector<std::vector<double>> denom =
        wealth_path(trip, bundle, num.rho);
    const std::vector<std::vector<double>> numer =
        wealth_path(trip, bundle, v1(0.1));

    const SimulationReport ok = supermartingale_test(bundle, numer, denom);
    CHECK(ok.statistic == "relativeWealthMean");
    CHECK(ok.consistent);
    CHECK(ok.sampleSize == 4000);
    CHECK(ok.estimate <= 1.0 + 3 * ok.stdError);

    // Inflate the numerator: the mean ratio sits far above 1.
    std::vector<std::vector<double>> rigged = numer;
    for (std::vector<double>& path : rigged)
        for (double& w : path) w *= 1.25;
    const SimulationReport bad = supermartingale_test(bundle, rigged, denom);
    CHECK(!bad.consistent);
}

TEST_CASE("increasing-profit demo on a monotone market") {
    // Drift 1, one atom at +1 rate 1: the long position never loses.
    const LevyTriplet trip = testutil::one_atom(1.0, 1.0, 1.0);
    const SimulationReport rep =
        increasing_profit_demo(trip, v1(1.0), 1.0, 2000, 9);
    CHECK(rep.consistent);
    CHECK(rep.estimate > 0.5);   // fraction strictly above 1 (~1 - e^{-1} here
                                 // from jump-free paths ending at e^{0} = 1...
                                 // drift makes even those exceed 1)
    CHECK(rep.sampleSize == 2000);
    CHECK(rep.details.count("meanTerminalWealth") == 1);
    CHECK(rep.details.at("meanTerminalWealth") > 1.0);
}

TEST_CASE("increasing-profit demo rejects losing directions") {
    const LevyTriplet bsm = testutil::bsm1(0.08, 0.16);
    CHECK_THROWS_AS(increasing_profit_demo(bsm, v1(1.0), 1.0, 100, 9),
                    NotImmediateArbitrage);
}

TEST_CASE("stop policy freezes wealth at the level") {
    const LevyTriplet trip = testutil::one_atom(1.0, 1.0, 1.0);
    const PathBundle bundle = sample_paths(trip, 3.0, 32, 200, 13);
    const std::vector<std::vector<double>> W =
        wealth_path(trip, bundle, v1(1.0), StopPolicy::when_wealth_exceeds(2.0));
    for (const std::vector<double>& path : W) {
        bool frozen = false;
        double frozenAt = 0.0;
        for (const double w : path) {
            if (frozen) CHECK(w == doctest::Approx(frozenAt));
            if (!frozen && w >= 2.0) {
                frozen = true;
                frozenAt = w;
            }
        }
    }
}

TEST_CASE("infinite-horizon demo refuses a supermartingale law") {
    // Negative drift, long-only: the zero portfolio dominates, no free lunch.
    LevyTriplet trip;
    trip.dim = 1;
    trip.b = v1(-1.0);
    trip.c = Mat::Zero(1, 1);
    trip.nu = JumpMeasure{};
    trip.nu.dim = 1;
    CHECK_THROWS_AS(infinite_horizon_free_lunch_demo(
                        trip, ConstraintSet::orthant(v1(1.0)), 2.0, 3, 100),
                    InvariantViolation);
}

TEST_CASE("infinite-horizon demo hits the level on a drifting market") {
    LevyTriplet trip;
    trip.dim = 1;
    trip.b = v1(1.0);
    trip.c = Mat::Zero(1, 1);
    trip.nu = JumpMeasure{};
    trip.nu.dim = 1;
    const SimulationReport rep = infinite_horizon_free_lunch_demo(
        trip, ConstraintSet::orthant(v1(1.0)), 2.0, 3, 500);
    CHECK(rep.statistic == "levelHitFraction");
    CHECK(rep.estimate >= 0.99);
    CHECK(rep.consistent);
    CHECK(rep.details.count("horizon") == 1);
}

TEST_CASE("esscher martingale check on a small diffusion run") {
    const LevyTriplet bsm = testutil::bsm1(0.08, 0.16);
    EsscherParams params;
    params.eta = v1(0.5);
    params.g = GTag::Zero;
    params.psi = psi(bsm, params.eta, params.g);
    const SimulationReport rep =
        esscher_martingale_check(bsm, params, 1.0, 4000, 21);
    CHECK(rep.statistic == "tiltedDensityMean");
    CHECK(rep.consistent);
    CHECK(std::abs(rep.estimate - 1.0) <= 3 * rep.stdError);
    CHECK(rep.rngFamily == std::string(rng::kFamily));
}

TEST_CASE("paths csv dump has the expected shape") {
    const LevyTriplet trip = testutil::bsm1(0.08, 0.16);
    const PathBundle bundle = sample_paths(trip, 1.0, 4, 3, 55);
    const std::string file = "/tmp/levy_test_paths.csv";
    write_paths_csv(file, bundle);

    std::FILE* f = std::fopen(file.c_str(), "r");
    REQUIRE(f != nullptr);
    char line[256];
    REQUIRE(std::fgets(line, sizeof line, f) != nullptr);
    CHECK(std::string(line).rfind("path,time,x0", 0) == 0);
    int rows = 0;
    while (std::fgets(line, sizeof line, f)) ++rows;
    std::fclose(f);
    // 3 paths x 5 grid points (nSteps=4 plus t=0), no jumps inserted for
    // a pure diffusion.
    CHECK(rows == 15);
    std::remove(file.c_str());
}
