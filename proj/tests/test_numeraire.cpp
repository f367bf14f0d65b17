#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "levy/common.hpp"
#include "levy/constraints.hpp"
#include "levy/numeraire.hpp"

using namespace levy;
using testutil::v1;
using testutil::v2;

TEST_CASE("growth rate closed forms") {
    // Pure diffusion: g(pi) = pi b - pi^2 c / 2.
    const LevyTriplet bsm = testutil::bsm1(0.08, 0.16);
    const ExtReal g = growth_rate(bsm, v1(0.25));
    REQUIRE(g.is_finite());
    CHECK(g.value() == doctest::Approx(0.25 * 0.08 - 0.5 * 0.0625 * 0.16)
                           .epsilon(1e-12));

    // Affine-density market at full investment:
    // g(1) = 1 + int_{-1}^{1} (log(1+x) - x)(1+x) dx = 2 log 2 - 2/3.
    const LevyTriplet affine = testutil::affine_market();
    const ExtReal g1 = growth_rate(affine, v1(1.0));
    REQUIRE(g1.is_finite());
    CHECK(g1.value() ==
          doctest::Approx(2.0 * std::log(2.0) - 2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("growth rate outside the natural constraints is minus infinity") {
    const LevyTriplet affine = testutil::affine_market();
    CHECK(growth_rate(affine, v1(1.5)).is_neg_inf());
    CHECK(growth_rate(affine, v1(-1.2)).is_neg_inf());
}

TEST_CASE("heavy tails push the growth rate to plus infinity") {
    // The log-tail measure does not integrate log: riding the tail earns an
    // infinite growth rate (tagged, not an error).
    const LevyTriplet heavy = testutil::heavy_log_tail_market();
    CHECK(growth_rate(heavy, v1(0.5)).is_pos_inf());
    const ExtReal g0 = growth_rate(heavy, v1(0.0));
    REQUIRE(g0.is_finite());
    CHECK(g0.value() == doctest::Approx(0.0));
}

TEST_CASE("derivative matches the affine-market hand value and finite differences") {
    const LevyTriplet affine = testutil::affine_market();
    // d/dpi g at pi=1 equals 1/3:
    // 1 + int (x/(1+x) - x)(1+x) dx over (-1,1] = 1 - 2/3 = 1/3.
    const ExtReal d1 = growth_rate_derivative(affine, v1(1.0), v1(1.0));
    REQUIRE(d1.is_finite());
    CHECK(d1.value() == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

    // Central finite difference at an interior point.
    const double h = 1e-6;
    const double gp = growth_rate(affine, v1(0.4 + h)).value();
    const double gm = growth_rate(affine, v1(0.4 - h)).value();
    const double fd = (gp - gm) / (2 * h);
    const ExtReal an = growth_rate_derivative(affine, v1(0.4), v1(1.0));
    REQUIRE(an.is_finite());
    CHECK(an.value() == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("relative rate identities") {
    const LevyTriplet affine = testutil::affine_market();
    // rel(0 | 1) = -1/3 on the affine market.
    const ExtReal r = rel_rate(affine, v1(0.0), v1(1.0));
    REQUIRE(r.is_finite());
    CHECK(r.value() == doctest::Approx(-1.0 / 3.0).epsilon(1e-9));
    // rel(rho | rho) = 0.
    const ExtReal rr = rel_rate(affine, v1(1.0), v1(1.0));
    REQUIRE(rr.is_finite());
    CHECK(rr.value() == doctest::Approx(0.0).epsilon(1e-12));
    // rel_rate(pi + d | pi) equals the directional derivative at pi.
    const ExtReal lhs = rel_rate(affine, v1(0.7), v1(0.4));
    const ExtReal rhs = growth_rate_derivative(affine, v1(0.4), v1(0.3));
    REQUIRE(lhs.is_finite());
    REQUIRE(rhs.is_finite());
    CHECK(lhs.value() == doctest::Approx(rhs.value()).epsilon(1e-10));
}

TEST_CASE("null directions leave growth and relative rates unchanged") {
    // Inert second asset: moves along e2 change nothing.
    LevyTriplet trip;
    trip.dim = 2;
    trip.b = v2(0.08, 0.0);
    trip.c = Mat::Zero(2, 2);
    trip.c(0, 0) = 0.16;
    trip.nu = JumpMeasure{};
    trip.nu.dim = 2;

    const ExtReal base = growth_rate(trip, v2(0.5, 0.0));
    const ExtReal moved = growth_rate(trip, v2(0.5, 3.7));
    REQUIRE(base.is_finite());
    REQUIRE(moved.is_finite());
    CHECK(base.value() == doctest::Approx(moved.value()).epsilon(1e-12));

    const ExtReal rel = rel_rate(trip, v2(0.2, -5.0), v2(0.5, 2.0));
    const ExtReal relBase = rel_rate(trip, v2(0.2, 0.0), v2(0.5, 0.0));
    REQUIRE(rel.is_finite());
    REQUIRE(relBase.is_finite());
    CHECK(rel.value() == doctest::Approx(relBase.value()).epsilon(1e-12));
}

TEST_CASE("numeraire of a diffusion market is the mean-variance ratio") {
    const double b = 0.08, c = 0.16;
    const LevyTriplet bsm = testutil::bsm1(b, c);
    const NumeraireResult res =
        solve_numeraire(bsm, ConstraintSet::full_space(1));
    CHECK(res.rho(0) == doctest::Approx(b / c).epsilon(1e-9));
    CHECK(res.kktResidual <= 1e-8);
    REQUIRE(res.growthRate.is_finite());
    CHECK(res.growthRate.value() ==
          doctest::Approx(0.5 * b * b / c).epsilon(1e-9));
    CHECK(!res.extrapolated);
    // The verification sweep agrees: nothing beats rho.
    CHECK(verify_numeraire(bsm, ConstraintSet::full_space(1), res.rho) <= 1e-8);
}

TEST_CASE("constrained numeraire lands on the boundary") {
    // Optimal unconstrained point is 0.5; cap the position at 0.2.
    const LevyTriplet bsm = testutil::bsm1(0.08, 0.16);
    const ConstraintSet C = ConstraintSet::box(v1(0.0), v1(0.2));
    const NumeraireResult res = solve_numeraire(bsm, C);
    CHECK(res.rho(0) == doctest::Approx(0.2).epsilon(1e-8));
    CHECK(verify_numeraire(bsm, C, res.rho) <= 1e-8);
}

TEST_CASE("affine jump market has numeraire at full investment") {
    const LevyTriplet affine = testutil::affine_market();
    const NumeraireResult res =
        solve_numeraire(affine, ConstraintSet::full_space(1));
    CHECK(res.rho(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.kktResidual <= 1e-6);
    REQUIRE(res.growthRate.is_finite());
    CHECK(res.growthRate.value() ==
          doctest::Approx(2.0 * std::log(2.0) - 2.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("immediate arbitrage aborts the numeraire solve") {
    const LevyTriplet trip = testutil::one_atom(1.0, 1.0, 1.0);
    CHECK_THROWS_AS(solve_numeraire(trip, ConstraintSet::full_space(1)),
                    IaoPresent);
}

TEST_CASE("tail lightening reports its trace and extrapolates") {
    const LevyTriplet heavy = testutil::heavy_log_tail_market();
    quad::Options opt;
    opt.absTol = 1e-9;
    opt.relTol = 1e-7;
    const NumeraireResult res =
        solve_numeraire(heavy, ConstraintSet::box(v1(0.0), v1(1.0)), opt);
    CHECK(res.extrapolated);
    REQUIRE(res.approxTrace.size() >= 3);
    // Lightened problems sharpen monotonically toward the limit.
    for (size_t i = 1; i < res.approxTrace.size(); ++i) {
        CHECK(res.approxTrace[i].n > res.approxTrace[i - 1].n);
        CHECK(res.approxTrace[i].rho(0) >= res.approxTrace[i - 1].rho(0) - 1e-9);
    }
    CHECK(res.growthRate.is_pos_inf());
    // The fitted limit stays inside the constraint set.
    CHECK(res.rho(0) >= 0.0);
    CHECK(res.rho(0) <= 1.0);
}

TEST_CASE("log-optimality of the numeraire holds on simulated paths") {
    const LevyTriplet bsm = testutil::bsm1(0.08, 0.16);
    const NumeraireResult res =
        solve_numeraire(bsm, ConstraintSet::full_space(1));
    const LogOptimalityReport rep = log_optimality_gap(
        bsm, ConstraintSet::full_space(1), res.rho, 1.0, 42, 4000);
    REQUIRE(!rep.entries.empty());
    CHECK(rep.allOrdered);
    CHECK(rep.allNonPositive);
    for (const LogOptimalityEntry& e : rep.entries) {
        CHECK(e.analyticLogExpectation <= 1e-9);
        CHECK(e.mcLogMean <= e.analyticLogExpectation + 3 * e.mcLogStdErr + 1e-9);
    }
}
