#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "levy/common.hpp"
#include "levy/constraints.hpp"
#include "levy/esscher.hpp"
#include "levy/levy_core.hpp"

using namespace levy;
using testutil::v1;
using testutil::v2;

TEST_CASE("psi closed form for a single atom") {
    // psi(eta, 0) = -eta b + lambda (e^{-eta x} - 1 + eta x 1_{|x|<=1}).
    const LevyTriplet trip = testutil::one_atom(0.4, 0.5, 2.0);
    const double eta = 1.3;
    const double expect =
        -eta * 0.4 + 2.0 * (std::exp(-eta * 0.5) - 1.0 + eta * 0.5);
    CHECK(psi(trip, v1(eta), GTag::Zero) ==
          doctest::Approx(expect).epsilon(1e-12));

    // Atom outside the unit ball loses the compensator term.
    const LevyTriplet far = testutil::one_atom(0.4, 2.0, 0.7);
    const double expectFar = -eta * 0.4 + 0.7 * (std::exp(-eta * 2.0) - 1.0);
    CHECK(psi(far, v1(eta), GTag::Zero) ==
          doctest::Approx(expectFar).epsilon(1e-12));

    // The quadratic tail multiplies the far atom by e^{-(|x|^2-1)} = e^{-3}.
    const double expectQuad =
        -eta * 0.4 + 0.7 * (std::exp(-eta * 2.0 - 3.0) - 1.0);
    CHECK(psi(far, v1(eta), GTag::QuadraticTail) ==
          doctest::Approx(expectQuad).epsilon(1e-12));
}

TEST_CASE("psi of pure diffusion and the variance-ratio tilt") {
    const double b = 0.18, c = 0.49;
    const LevyTriplet bsm = testutil::bsm1(b, c);
    const double eta = 0.6;
    CHECK(psi(bsm, v1(eta), GTag::Zero) ==
          doctest::Approx(-eta * b + 0.5 * eta * eta * c).epsilon(1e-12));

    // At eta = b/c the normalizer is -b^2/(2c).
    CHECK(psi(bsm, v1(b / c), GTag::Zero) ==
          doctest::Approx(-0.5 * b * b / c).epsilon(1e-12));
}

TEST_CASE("diffusion transform shifts the drift by -c eta") {
    LevyTriplet trip;
    trip.dim = 2;
    trip.b = v2(0.10, 0.05);
    trip.c = Mat(2, 2);
    trip.c << 0.04, 0.01, 0.01, 0.09;
    trip.nu = JumpMeasure{};
    trip.nu.dim = 2;

    EsscherParams params;
    params.eta = v2(0.8, -0.3);
    params.g = GTag::Zero;
    params.psi = psi(trip, params.eta, params.g);

    const TransformedTriplet out = transform_triplet(trip, params);
    const Vec expected = trip.b - trip.c * params.eta;
    CHECK((out.triplet.b - expected).norm() ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK((out.triplet.c - trip.c).norm() == doctest::Approx(0.0));
    CHECK(out.triplet.nu.is_zero());
}

TEST_CASE("transform reweights atoms and densities by the tilt factor") {
    LevyTriplet trip;
    trip.dim = 1;
    trip.b = v1(0.0);
    trip.c = Mat::Zero(1, 1);
    trip.nu = JumpMeasure{};
    trip.nu.dim = 1;
    trip.nu.atoms.push_back(Atom{v1(0.5), 1.2});
    trip.nu.atoms.push_back(Atom{v1(2.0), 0.3});
    DensitySegment seg;
    seg.factors.push_back(Family1D::polynomial({1.0}, -0.9, 0.9));
    trip.nu.segments.push_back(seg);

    EsscherParams params;
    params.eta = v1(0.7);
    params.g = GTag::QuadraticTail;
    params.psi = psi(trip, params.eta, params.g);

    const TransformedTriplet out = transform_triplet(trip, params);
    REQUIRE(out.triplet.nu.atoms.size() == 2);
    CHECK(out.triplet.nu.atoms[0].rate ==
          doctest::Approx(1.2 * std::exp(-0.7 * 0.5)).epsilon(1e-12));
    // |x| = 2 > 1 picks up g = |x|^2 - 1 = 3.
    CHECK(out.triplet.nu.atoms[1].rate ==
          doctest::Approx(0.3 * std::exp(-0.7 * 2.0 - 3.0)).epsilon(1e-12));

    REQUIRE(out.triplet.nu.segments.size() == 1);
    for (const double x : {-0.8, -0.2, 0.4, 0.85}) {
        CHECK(out.triplet.nu.segments[0].density1(x) ==
              doctest::Approx(std::exp(-0.7 * x)).epsilon(1e-10));
    }
}

TEST_CASE("two-step tilts compose into the combined tilt") {
    // Applying (eta, 0) then (0, quadraticTail) must match (eta, quadraticTail).
    LevyTriplet trip;
    trip.dim = 1;
    trip.b = v1(0.3);
    trip.c = Mat::Zero(1, 1);
    trip.c(0, 0) = 0.25;
    trip.nu = JumpMeasure{};
    trip.nu.dim = 1;
    trip.nu.atoms.push_back(Atom{v1(0.6), 0.8});
    trip.nu.atoms.push_back(Atom{v1(2.0), 0.4});
    DensitySegment seg;
    seg.factors.push_back(Family1D::power_log(3.0, 1.0, 1.0, +1));
    trip.nu.segments.push_back(seg);

    EsscherParams first;
    first.eta = v1(0.5);
    first.g = GTag::Zero;
    first.psi = psi(trip, first.eta, first.g);
    const TransformedTriplet mid = transform_triplet(trip, first);

    EsscherParams second;
    second.eta = v1(0.0);
    second.g = GTag::QuadraticTail;
    second.psi = psi(mid.triplet, second.eta, second.g);
    const TransformedTriplet two = transform_triplet(mid.triplet, second);

    EsscherParams combined;
    combined.eta = v1(0.5);
    combined.g = GTag::QuadraticTail;
    combined.psi = psi(trip, combined.eta, combined.g);
    const TransformedTriplet one = transform_triplet(trip, combined);

    CHECK((two.triplet.b - one.triplet.b).norm() ==
          doctest::Approx(0.0).epsilon(1e-10));
    CHECK((two.triplet.c - one.triplet.c).norm() == doctest::Approx(0.0));
    REQUIRE(two.triplet.nu.atoms.size() == one.triplet.nu.atoms.size());
    for (size_t i = 0; i < one.triplet.nu.atoms.size(); ++i) {
        CHECK(two.triplet.nu.atoms[i].rate ==
              doctest::Approx(one.triplet.nu.atoms[i].rate).epsilon(1e-10));
    }
    REQUIRE(two.triplet.nu.segments.size() == one.triplet.nu.segments.size());
    for (const double x : {1.2, 2.5, 7.0, 40.0}) {
        CHECK(two.triplet.nu.segments[0].density1(x) ==
              doctest::Approx(one.triplet.nu.segments[0].density1(x))
                  .epsilon(1e-10));
    }
}

TEST_CASE("transformed atomic market matches its closed-form exponent") {
    LevyTriplet trip;
    trip.dim = 1;
    trip.b = v1(0.2);
    trip.c = Mat::Zero(1, 1);
    trip.nu = JumpMeasure{};
    trip.nu.dim = 1;
    trip.nu.atoms.push_back(Atom{v1(0.5), 1.0});
    trip.nu.atoms.push_back(Atom{v1(-0.4), 0.6});

    EsscherParams params;
    params.eta = v1(0.9);
    params.g = GTag::Zero;
    params.psi = psi(trip, params.eta, params.g);
    const LevyTriplet out = transform_triplet(trip, params).triplet;

    // phi'(u) = i u b' + sum lambda_j e^{-eta x_j} (e^{i u x_j} - 1 - i u x_j).
    for (const double u : {-2.0, -0.5, 1.0, 3.0}) {
        const std::complex<double> phi = char_exponent(out, v1(u));
        std::complex<double> expect(0.0, u * out.b(0));
        for (const Atom& a : out.nu.atoms) {
            const std::complex<double> iux(0.0, u * a.x(0));
            expect += a.rate * (std::exp(iux) - 1.0 - iux);
        }
        CHECK(std::abs(phi - expect) <= 1e-10);
    }
}

TEST_CASE("supermartingale drift verdicts") {
    // Strong downward drift with upward power-law jumps, long-only: every
    // admissible position has nonpositive compensated return.
    LevyTriplet trip;
    trip.dim = 1;
    trip.b = v1(-2.0);
    trip.c = Mat::Zero(1, 1);
    trip.nu = JumpMeasure{};
    trip.nu.dim = 1;
    DensitySegment seg;
    seg.factors.push_back(Family1D::power_law(3.0, 1.0, 1.0, +1));
    trip.nu.segments.push_back(seg);

    const SupermartingaleVerdict ok =
        is_supermartingale_measure(trip, ConstraintSet::orthant(v1(1.0)));
    CHECK(ok.holds);
    CHECK(ok.directionsChecked > 0);

    // A plain diffusion with positive drift is not a supermartingale measure
    // over the full space.
    const SupermartingaleVerdict bad = is_supermartingale_measure(
        testutil::bsm1(0.08, 0.16), ConstraintSet::full_space(1));
    CHECK(!bad.holds);
    REQUIRE(bad.worstDirection.size() == 1);
    CHECK(bad.worstDirection(0) > 0.0);
}

TEST_CASE("find_esmm on a diffusion market is EMM-grade") {
    LevyTriplet trip;
    trip.dim = 2;
    trip.b = v2(0.10, 0.05);
    trip.c = Mat(2, 2);
    trip.c << 0.04, 0.01, 0.01, 0.09;
    trip.nu = JumpMeasure{};
    trip.nu.dim = 2;

    const EsmmResult res =
        find_esmm(trip, ConstraintSet::full_space(2), 1.0);
    REQUIRE(res.found);
    CHECK(res.meanRateZero);
    const Vec etaStar = trip.c.ldlt().solve(trip.b);
    CHECK((res.params.eta - etaStar).lpNorm<Eigen::Infinity>() <=  1e-6);
    CHECK(res.transformedMeanRate.lpNorm<Eigen::Infinity>() <= 1e-7);
}

TEST_CASE("find_esmm can return a strict supermartingale measure") {
    // Downward drift, upward jumps, long-only cone: eta = 0 already works
    // and no tilt can lift the mean rate to zero.
    LevyTriplet trip;
    trip.dim = 1;
    trip.b = v1(-2.0);
    trip.c = Mat::Zero(1, 1);
    trip.nu = JumpMeasure{};
    trip.nu.dim = 1;
    DensitySegment seg;
    seg.factors.push_back(Family1D::power_law(3.0, 1.0, 1.0, +1));
    trip.nu.segments.push_back(seg);

    const EsmmResult res =
        find_esmm(trip, ConstraintSet::orthant(v1(1.0)), 1.0);
    REQUIRE(res.found);
    CHECK(!res.meanRateZero);
    CHECK(res.params.eta.lpNorm<Eigen::Infinity>() <= 1e-7);
    REQUIRE(res.transformedMeanRate.size() == 1);
    CHECK(res.transformedMeanRate(0) < 0.0);
}

TEST_CASE("find_esmm reports the blocking arbitrage when none exists") {
    const LevyTriplet trip = testutil::one_atom(1.0, 1.0, 1.0);
    const EsmmResult res =
        find_esmm(trip, ConstraintSet::orthant(v1(1.0)), 1.0);
    CHECK(!res.found);
    CHECK(res.witness.found);
    CHECK(res.witness.xi(0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("found tilt passes the supermartingale drift check") {
    const LevyTriplet affine = testutil::affine_market();
    const ConstraintSet C = ConstraintSet::full_space(1);
    const EsmmResult res = find_esmm(affine, C, 1.0);
    REQUIRE(res.found);
    const LevyTriplet tilted = transform_triplet(affine, res.params).triplet;
    const SupermartingaleVerdict v = is_supermartingale_measure(tilted, C);
    CHECK(v.holds);
}

TEST_CASE("completeness verdicts cover the reason catalog") {
    const ConstraintSet freeLine = ConstraintSet::full_space(1);

    // Pure diffusion: complete, kernel is trivial.
    const CompletenessVerdict bsm =
        check_completeness(testutil::bsm1(0.08, 0.16), freeLine);
    CHECK(bsm.complete);
    CHECK(bsm.reason.empty());
    CHECK(bsm.kernelDim == 0);

    // Density segments mean infinitely many jump sizes.
    const CompletenessVerdict dense =
        check_completeness(testutil::affine_market(), freeLine);
    CHECK(!dense.complete);
    CHECK(dense.reason == "infiniteSupport");

    // A jump the diffusion already spans cannot be hedged separately.
    LevyTriplet mixed = testutil::bsm1(0.05, 0.09);
    mixed.nu.atoms.push_back(Atom{v1(0.4), 1.0});
    const CompletenessVerdict outside = check_completeness(mixed, freeLine);
    CHECK(!outside.complete);
    CHECK(outside.reason == "supportOutsideKernel");

    // Two atoms against one driftless asset: too many jump points.
    LevyTriplet two;
    two.dim = 1;
    two.b = v1(0.05);
    two.c = Mat::Zero(1, 1);
    two.nu = JumpMeasure{};
    two.nu.dim = 1;
    two.nu.atoms.push_back(Atom{v1(0.5), 1.0});
    two.nu.atoms.push_back(Atom{v1(-0.3), 1.0});
    const CompletenessVerdict many = check_completeness(two, freeLine);
    CHECK(!many.complete);
    CHECK(many.reason == "tooManyJumpPoints");
    CHECK(many.kernelDim == 1);

    // One downward atom with zero drift: complete one-jump market.
    const CompletenessVerdict oneAtom =
        check_completeness(testutil::one_atom(0.0, -0.5, 1.0), freeLine);
    CHECK(oneAtom.complete);
    CHECK(oneAtom.kernelDim == 1);

    // One upward atom with nonnegative compensated drift: the arbitrage
    // condition bars completeness.
    const CompletenessVerdict arb =
        check_completeness(testutil::one_atom(1.0, 1.0, 1.0), freeLine);
    CHECK(!arb.complete);
    CHECK(arb.reason == "arbitrageCondition");
}

TEST_CASE("completeness is defined only for unconstrained markets") {
    CHECK_THROWS_AS(check_completeness(testutil::bsm1(0.08, 0.16),
                                       ConstraintSet::orthant(v1(1.0))),
                    ConstrainedMarket);
}
