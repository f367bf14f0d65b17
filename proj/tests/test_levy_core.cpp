#include <cmath>
#include <complex>

#include <doctest.h>

#include "levy/levy_core.hpp"

#include "helpers.hpp"

using namespace levy;
using testutil::v1;
using testutil::v2;

namespace {

// Independent formula for a drift + diffusion + finite-atom market:
// phi(u) = i u'b - u'cu/2 + sum rate*(e^{i u'x} - 1 - i u'x 1_{|x|<=1}).
std::complex<double> atom_phi(const LevyTriplet& t, const Vec& u) {
    const std::complex<double> i(0.0, 1.0);
    std::complex<double> out = i * u.dot(t.b) - 0.5 * u.dot(t.c * u);
    for (const Atom& a : t.nu.atoms) {
        const double ux = u.dot(a.x);
        std::complex<double> term = std::exp(i * ux) - 1.0;
        if (a.x.norm() <= 1.0) term -= i * ux;
        out += a.rate * term;
    }
    return out;
}

}  // namespace

TEST_CASE("characteristic exponent matches the closed form on atomic markets") {
    LevyTriplet t;
    t.dim = 2;
    t.b = v2(0.3, -0.1);
    t.c = Mat(2, 2);
    t.c << 0.5, 0.1, 0.1, 0.2;
    t.nu.dim = 2;
    t.nu.atoms.push_back(Atom{v2(0.4, -0.2), 0.8});
    t.nu.atoms.push_back(Atom{v2(-1.5, 0.6), 0.3});
    t.validate();

    const Vec probes[] = {v2(1.0, 0.0), v2(0.0, 1.0), v2(0.7, -1.3),
                          v2(-2.0, 0.5), v2(3.1, 2.2)};
    for (const Vec& u : probes) {
        const auto got = char_exponent(t, u);
        const auto want = atom_phi(t, u);
        CHECK(std::abs(got - want) < 1e-10);
    }
}

TEST_CASE("characteristic exponent has Hermitian symmetry") {
    LevyTriplet t = testutil::affine_market();
    const double us[] = {0.3, 1.0, 2.7, -1.4, 5.0};
    for (double u : us) {
        const auto a = char_exponent(t, v1(u));
        const auto b = char_exponent(t, v1(-u));
        CHECK(std::abs(a - std::conj(b)) < 1e-10);
    }
}

TEST_CASE("mean rate adds the large-jump first moment to the drift") {
    // Jumps at +1 sit on the truncation sphere: no correction.
    CHECK(mean_rate(testutil::one_atom(1.0, 1.0, 1.0)).value(0) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // x^-3 tail on [1, inf): first moment 1, drift -2, mean rate -1.
    LevyTriplet t = testutil::bsm1(-2.0, 0.0);
    DensitySegment seg;
    seg.factors.push_back(Family1D::power_law(3.0, 1.0, 1.0, 1));
    t.nu.segments.push_back(seg);
    const MeanRate mr = mean_rate(t);
    REQUIRE(mr.integrable);
    CHECK(mr.value(0) == doctest::Approx(-1.0).epsilon(1e-8));

    // The q=2 log-power tail has no first moment; reported honestly.
    const MeanRate heavy = mean_rate(testutil::heavy_log_tail_market());
    CHECK_FALSE(heavy.integrable);
    CHECK_FALSE(heavy.divergentTail.empty());
}

TEST_CASE("log exponential moment: diffusion and atom closed forms") {
    // Pure diffusion: u*b + u^2 c/2.
    const ExtReal bm = log_exp_moment(testutil::bsm1(0.1, 0.25), 2.0);
    REQUIRE(bm.is_finite());
    CHECK(bm.value() == doctest::Approx(0.2 + 0.5 * 4.0 * 0.25).epsilon(1e-12));

    // Single atom inside the ball: rate*(e^{ux} - 1 - ux).
    const ExtReal pm = log_exp_moment(testutil::one_atom(0.0, 0.5, 2.0), 1.0);
    REQUIRE(pm.is_finite());
    CHECK(pm.value() ==
          doctest::Approx(2.0 * (std::exp(0.5) - 1.0 - 0.5)).epsilon(1e-10));

    // Heavy positive tail: exponential moment cannot exist.
    CHECK(log_exp_moment(testutil::heavy_log_tail_market(), 0.5).is_pos_inf());
}

TEST_CASE("log integrability thresholds for the log-power tail") {
    auto tail = [](double q) {
        JumpMeasure nu;
        nu.dim = 1;
        DensitySegment seg;
        seg.factors.push_back(Family1D::power_log(q, 1.0, 1.0, 1));
        nu.segments.push_back(seg);
        return nu;
    };
    CHECK(integrates_log(tail(3.0)));
    CHECK_FALSE(integrates_log(tail(2.0)));
    CHECK_FALSE(integrates_log(tail(1.5)));

    JumpMeasure cubic;
    cubic.dim = 1;
    DensitySegment seg;
    seg.factors.push_back(Family1D::power_law(3.0, 1.0, 1.0, 1));
    cubic.segments.push_back(seg);
    CHECK(integrates_log(cubic));
}

TEST_CASE("tail lightening multiplies by |x|^(-1/n) beyond the unit ball") {
    const JumpMeasure nu = testutil::heavy_log_tail_market().nu;
    const double x = 10.0;
    const double base = nu.segments[1].density1(x);
    REQUIRE(base > 0.0);
    const double want[] = {0.1, 0.31622776601683794, 0.56234132519034907,
                           0.74989420933245588};
    const int ns[] = {1, 2, 4, 8};
    for (int k = 0; k < 4; ++k) {
        const JumpMeasure an = approximate(nu, ns[k]);
        const double ratio = an.segments[1].density1(x) / base;
        CHECK(ratio == doctest::Approx(want[k]).epsilon(1e-12));
        // Inside the ball the measure is untouched.
        CHECK(an.segments[0].density1(0.5) ==
              doctest::Approx(nu.segments[0].density1(0.5)).epsilon(1e-12));
        // The lightened tail now integrates the log.
        CHECK(integrates_log(an));
    }
}

TEST_CASE("truncated jump mean of the affine density") {
    // int x(1+x) dx over (-1,1] = 2/3.
    const Vec m = truncated_jump_mean(testutil::affine_market().nu);
    CHECK(m(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("mass above a cutoff counts atoms and density") {
    LevyTriplet t = testutil::affine_market();
    t.nu.atoms.push_back(Atom{v1(2.0), 0.25});
    // Density mass on {|x| > 0.5}: 0.125 on (-1,-0.5) plus 0.875 on (0.5,1];
    // the atom at 2 adds 0.25.
    CHECK(total_mass_above(t.nu, 0.5) == doctest::Approx(1.25).epsilon(1e-9));
    CHECK(total_mass_above(t.nu, 1.5) == doctest::Approx(0.25).epsilon(1e-12));
}
