#include "levy/levy_core.hpp"

#include <cmath>

namespace levy {

std::complex<double> char_exponent(const LevyTriplet& trip, const Vec& u,
                                   const quad::Options& opt) {
    const double quadPart = -0.5 * u.dot(trip.c * u);
    const double driftPart = u.dot(trip.b);

    Integrand re;
    re.f = [&u](const Vec& x) { return std::cos(u.dot(x)) - 1.0; };
    re.growth = Integrand::Growth::BoundedLimit;

    Integrand im;
    im.f = [&u](const Vec& x) {
        const double ux = u.dot(x);
        return std::sin(ux) - (x.norm() <= 1.0 ? ux : 0.0);
    };
    im.growth = Integrand::Growth::BoundedLimit;

    const double reJump = integrate_measure(trip.nu, re, opt).expect_finite(
        "real part of the jump integral diverged");
    const double imJump = integrate_measure(trip.nu, im, opt).expect_finite(
        "imaginary part of the jump integral diverged");
    return {quadPart + reJump, driftPart + imJump};
}

MeanRate mean_rate(const LevyTriplet& trip, const quad::Options& opt) {
    MeanRate out;
    for (const DensitySegment& seg : trip.nu.segments) {
        if (!seg.unbounded()) continue;
        if (seg.tail_law().moment(1.0) != TailLaw::Verdict::Converges) {
            out.integrable = false;
            out.divergentTail = seg.tail_dir() > 0
                                    ? "right tail has no first moment"
                                    : "left tail has no first moment";
            return out;
        }
    }
    Integrand f;
    f.growth = Integrand::Growth::Linear;
    out.value = trip.b;
    for (int i = 0; i < trip.dim; ++i) {
        f.f = [i](const Vec& x) { return x.norm() > 1.0 ? x(i) : 0.0; };
        out.value(i) += integrate_measure(trip.nu, f, opt).expect_finite(
            "large-jump mean diverged despite integrable tail law");
    }
    return out;
}

ExtReal log_exp_moment(const LevyTriplet& trip, double u,
                       const quad::Options& opt) {
    if (trip.dim != 1)
        throw UnsupportedVariant("exponential moments are provided for one-asset markets");
    if (u == 0.0) return ExtReal::finite(0.0);

    double total = u * trip.b(0) + 0.5 * u * u * trip.c(0, 0);

    for (const Atom& a : trip.nu.atoms) {
        const double x = a.x(0);
        const double trunc = std::abs(x) <= 1.0 ? u * x : 0.0;
        const double term = a.rate * (std::expm1(u * x) - trunc);
        if (!std::isfinite(term))
            throw QuadratureDivergence("atom contribution to exponential moment overflowed");
        total += term;
    }

    for (const DensitySegment& seg : trip.nu.segments) {
        if (seg.unbounded() &&
            seg.tail_law().exp_moment(u * seg.tail_dir(), 0.0) !=
                TailLaw::Verdict::Converges)
            return ExtReal::pos_inf();
    }

    for (const DensitySegment& seg : trip.nu.segments) {
        // Inner part on |x| <= 1: smooth integrand e^{ux} - 1 - ux.
        Integrand inner;
        inner.growth = Integrand::Growth::BoundedLimit;
        inner.f = [u](const Vec& x) {
            const double ux = u * x(0);
            return x.norm() <= 1.0 ? std::expm1(ux) - ux : 0.0;
        };
        total +=
            integrate_segment(seg, inner, opt).expect_finite("inner exponential part diverged");

        if (!seg.unbounded()) {
            Integrand outer;
            outer.growth = Integrand::Growth::BoundedLimit;
            outer.f = [u](const Vec& x) {
                return x.norm() > 1.0 ? std::expm1(u * x(0)) : 0.0;
            };
            total += integrate_segment(seg, outer, opt)
                         .expect_finite("outer exponential part diverged");
            continue;
        }

        // Outer part via the tilted segment: integral over |x| > 1 of
        // (e^{ux} - 1) nu(dx) = mass>1 of e^{ux} nu minus mass>1 of nu,
        // which routes the exponential factor through the tail law.
        DensitySegment tilted = seg;
        Vec eta(1);
        eta << -u;
        tilted.modifiers.push_back(Modifier::exp_tilt(eta, GTag::Zero));
        const double tiltedMass = segment_mass_above(tilted, 1.0, opt);
        const double plainMass = segment_mass_above(seg, 1.0, opt);
        total += tiltedMass - plainMass;
    }
    if (!std::isfinite(total))
        throw QuadratureDivergence("exponential moment overflowed");
    return ExtReal::finite(total);
}

bool integrates_log(const JumpMeasure& nu) {
    for (const DensitySegment& seg : nu.segments) {
        if (!seg.unbounded()) continue;
        if (seg.tail_law().log_moment() != TailLaw::Verdict::Converges) return false;
    }
    return true;
}

JumpMeasure approximate(const JumpMeasure& nu, int n) {
    if (n < 1) throw SchemaError("approximation index must be >= 1");
    JumpMeasure out = nu;
    for (Atom& a : out.atoms) {
        const double ax = a.x.norm();
        if (ax > 1.0) a.rate *= std::pow(ax, -1.0 / n);
    }
    for (DensitySegment& seg : out.segments)
        seg.modifiers.push_back(Modifier::log_tame(n));
    return out;
}

Vec truncated_jump_mean(const JumpMeasure& nu, const quad::Options& opt) {
    Vec m = Vec::Zero(nu.dim);
    Integrand f;
    f.growth = Integrand::Growth::BoundedLimit;
    for (int i = 0; i < nu.dim; ++i) {
        f.f = [i](const Vec& x) { return x.norm() <= 1.0 ? x(i) : 0.0; };
        m(i) = integrate_measure(nu, f, opt).expect_finite(
            "truncated jump mean diverged");
    }
    return m;
}

double total_mass_above(const JumpMeasure& nu, double eps,
                        const quad::Options& opt) {
    if (!(eps >= 0)) throw SchemaError("mass threshold must be nonnegative");
    double total = 0.0;
    for (const Atom& a : nu.atoms)
        if (a.x.norm() > eps) total += a.rate;
    for (const DensitySegment& seg : nu.segments)
        total += segment_mass_above(seg, eps, opt);
    return total;
}

}  // namespace levy
