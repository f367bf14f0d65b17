#include "levy/jump_measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace levy {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double g_val(GTag g, double normx) {
    if (g == GTag::Zero) return 0.0;
    return normx > 1.0 ? normx * normx - 1.0 : 0.0;
}

// ===========================================================================
// SupportRegion
// ===========================================================================

SupportRegion SupportRegion::interval(double lo, double hi) {
    SupportRegion r;
    r.kind = Kind::Interval;
    r.lo = lo;
    r.hi = hi;
    return r;
}

SupportRegion SupportRegion::box(Vec lower, Vec upper) {
    SupportRegion r;
    r.kind = Kind::Box;
    r.lower = std::move(lower);
    r.upper = std::move(upper);
    return r;
}

SupportRegion SupportRegion::half_line(Vec offset, Vec direction) {
    SupportRegion r;
    r.kind = Kind::HalfLine;
    r.offset = std::move(offset);
    r.direction = std::move(direction);
    return r;
}

SupportRegion SupportRegion::atom_cloud(std::vector<Vec> points) {
    SupportRegion r;
    r.kind = Kind::AtomCloud;
    r.points = std::move(points);
    return r;
}

int SupportRegion::dim() const {
    switch (kind) {
        case Kind::Interval: return 1;
        case Kind::Box: return static_cast<int>(lower.size());
        case Kind::HalfLine: return static_cast<int>(offset.size());
        case Kind::AtomCloud:
            return points.empty() ? 0 : static_cast<int>(points[0].size());
    }
    return 0;
}

ExtReal SupportRegion::inf_dot(const Vec& p) const {
    switch (kind) {
        case Kind::Interval: {
            const double s = p(0);
            double v = kInf;
            for (double e : {lo, hi}) {
                if (std::isinf(e)) {
                    if (s * e < 0) return ExtReal::neg_inf();
                    if (s == 0.0) v = std::min(v, 0.0);
                    continue;
                }
                v = std::min(v, s * e);
            }
            return ExtReal::finite(v);
        }
        case Kind::Box: {
            double v = 0.0;
            for (int i = 0; i < lower.size(); ++i) {
                const double s = p(i);
                if (s == 0.0) continue;
                const double e = s > 0 ? lower(i) : upper(i);
                if (std::isinf(e)) return ExtReal::neg_inf();
                v += s * e;
            }
            return ExtReal::finite(v);
        }
        case Kind::HalfLine: {
            const double base = p.dot(offset);
            const double slope = p.dot(direction);
            if (slope < -1e-15 * (1.0 + direction.norm() * p.norm()))
                return ExtReal::neg_inf();
            return ExtReal::finite(std::min(base, base + std::max(slope, 0.0)));
        }
        case Kind::AtomCloud: {
            double v = kInf;
            for (const Vec& x : points) v = std::min(v, p.dot(x));
            return points.empty() ? ExtReal::finite(0.0) : ExtReal::finite(v);
        }
    }
    return ExtReal::finite(0.0);
}

std::vector<Vec> SupportRegion::span_points() const {
    std::vector<Vec> out;
    auto push_nonzero = [&out](const Vec& v) {
        if (v.norm() > 0) out.push_back(v);
    };
    switch (kind) {
        case Kind::Interval: {
            Vec a(1), b(1);
            a << (std::isinf(lo) ? -1.0 : lo);
            b << (std::isinf(hi) ? 1.0 : hi);
            push_nonzero(a);
            push_nonzero(b);
            break;
        }
        case Kind::Box: {
            const int d = static_cast<int>(lower.size());
            Vec base(d);
            for (int i = 0; i < d; ++i) {
                double l = lower(i), u = upper(i);
                if (std::isinf(l)) l = std::isinf(u) ? -1.0 : u - 1.0;
                base(i) = l;
            }
            push_nonzero(base);
            for (int i = 0; i < d; ++i) {
                double u = upper(i);
                double w = std::isinf(u) ? 1.0 : u - base(i);
                if (w <= 0) continue;
                Vec q = base;
                q(i) += w;
                push_nonzero(q);
            }
            break;
        }
        case Kind::HalfLine:
            push_nonzero(offset);
            push_nonzero(offset + direction);
            break;
        case Kind::AtomCloud:
            for (const Vec& x : points) push_nonzero(x);
            break;
    }
    return out;
}

// ===========================================================================
// Family1D
// ===========================================================================

Family1D Family1D::polynomial(std::vector<double> coeffs, double lo, double hi) {
    Family1D f;
    f.kind = Kind::PolynomialOnInterval;
    f.coeffs = std::move(coeffs);
    f.lo = lo;
    f.hi = hi;
    f.check();
    return f;
}

Family1D Family1D::power_law(double p, double x0, double scale, int dir) {
    Family1D f;
    f.kind = Kind::PowerLawTail;
    f.p = p;
    f.x0 = x0;
    f.scale = scale;
    f.dir = dir;
    f.check();
    return f;
}

Family1D Family1D::power_log(double q, double x0, double scale, int dir) {
    Family1D f;
    f.kind = Kind::PowerLogTail;
    f.q = q;
    f.x0 = x0;
    f.scale = scale;
    f.dir = dir;
    f.check();
    return f;
}

double Family1D::eval(double x) const {
    switch (kind) {
        case Kind::PolynomialOnInterval: {
            if (x < lo || x > hi) return 0.0;
            double v = 0.0;
            for (size_t k = coeffs.size(); k-- > 0;) v = v * x + coeffs[k];
            return v;
        }
        case Kind::PowerLawTail: {
            const double t = dir * x;
            if (t < x0) return 0.0;
            return scale * std::pow(t, -p);
        }
        case Kind::PowerLogTail: {
            const double t = dir * x;
            if (t < x0) return 0.0;
            return scale / (t * std::pow(std::log1p(t), q));
        }
    }
    return 0.0;
}

double Family1D::support_lo() const {
    if (kind == Kind::PolynomialOnInterval) return lo;
    return dir > 0 ? x0 : -kInf;
}

double Family1D::support_hi() const {
    if (kind == Kind::PolynomialOnInterval) return hi;
    return dir > 0 ? kInf : -x0;
}

void Family1D::check() const {
    switch (kind) {
        case Kind::PolynomialOnInterval: {
            if (coeffs.empty()) throw SchemaError("polynomial density needs coefficients");
            if (!(lo < hi) || std::isinf(lo) || std::isinf(hi))
                throw SchemaError("polynomial density needs a finite interval lo < hi");
            for (int i = 0; i <= 1000; ++i) {
                const double x = lo + (hi - lo) * i / 1000.0;
                if (eval(x) < -1e-12)
                    throw SchemaError("polynomial density is negative on its support");
            }
            break;
        }
        case Kind::PowerLawTail:
            if (!(p > 0) || !(x0 > 0) || !(scale > 0) || (dir != 1 && dir != -1))
                throw SchemaError("power-law tail needs p>0, x0>0, scale>0, dir=+-1");
            break;
        case Kind::PowerLogTail:
            if (!(q > 0) || !(x0 >= 1.0) || !(scale > 0) || (dir != 1 && dir != -1))
                throw SchemaError("power-log tail needs q>0, x0>=1, scale>0, dir=+-1");
            break;
    }
}

// ===========================================================================
// Modifier
// ===========================================================================

Modifier Modifier::exp_tilt(Vec eta, GTag g) {
    Modifier m;
    m.kind = Kind::ExpTilt;
    m.eta = std::move(eta);
    m.g = g;
    return m;
}

Modifier Modifier::log_tame(int n) {
    if (n < 1) throw SchemaError("log-tame modifier needs n >= 1");
    Modifier m;
    m.kind = Kind::LogTame;
    m.n = n;
    return m;
}

double Modifier::eval(const Vec& x) const {
    const double ax = x.norm();
    if (kind == Kind::ExpTilt) return std::exp(-eta.dot(x) - g_val(g, ax));
    return ax <= 1.0 ? 1.0 : std::pow(ax, -1.0 / n);
}

double Modifier::eval1(double x) const {
    const double ax = std::abs(x);
    if (kind == Kind::ExpTilt) return std::exp(-eta(0) * x - g_val(g, ax));
    return ax <= 1.0 ? 1.0 : std::pow(ax, -1.0 / n);
}

// ===========================================================================
// DensitySegment
// ===========================================================================

bool DensitySegment::unbounded() const {
    for (const Family1D& f : factors)
        if (f.unbounded()) return true;
    return false;
}

int DensitySegment::tail_dir() const {
    if (dim() != 1 || !unbounded())
        throw LevyError("tail_dir: only meaningful for unbounded 1-d segments");
    return factors[0].dir;
}

double DensitySegment::density(const Vec& x) const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) {
        v *= factors[i].eval(x(i));
        if (v == 0.0) return 0.0;
    }
    for (const Modifier& m : modifiers) v *= m.eval(x);
    return v;
}

double DensitySegment::density1(double x) const {
    double v = factors[0].eval(x);
    if (v == 0.0) return 0.0;
    for (const Modifier& m : modifiers) v *= m.eval1(x);
    return v;
}

SupportRegion DensitySegment::support() const {
    if (dim() == 1)
        return SupportRegion::interval(factors[0].support_lo(), factors[0].support_hi());
    Vec lo(dim()), hi(dim());
    for (int i = 0; i < dim(); ++i) {
        lo(i) = factors[i].support_lo();
        hi(i) = factors[i].support_hi();
    }
    return SupportRegion::box(lo, hi);
}

TailLaw DensitySegment::tail_law() const {
    TailLaw law;
    if (!unbounded()) return law;
    law.bounded = false;
    const Family1D& f = factors[0];
    if (f.kind == Family1D::Kind::PowerLawTail) {
        law.alpha = f.p;
    } else {
        law.alpha = 1.0;
        law.beta = f.q;
    }
    for (const Modifier& m : modifiers) {
        if (m.kind == Modifier::Kind::LogTame) {
            law.alpha += 1.0 / m.n;
        } else {
            law.gamma += f.dir * m.eta(0);
            if (m.g == GTag::QuadraticTail) law.delta += 1.0;
        }
    }
    return law;
}

void DensitySegment::check() const {
    if (factors.empty()) throw SchemaError("density segment needs at least one factor");
    for (const Family1D& f : factors) f.check();
    if (dim() > 1) {
        for (const Family1D& f : factors)
            if (f.unbounded())
                throw UnsupportedVariant(
                    "density segments in dimension > 1 must be product-form on bounded boxes");
    }
    for (const Modifier& m : modifiers) {
        if (m.kind == Modifier::Kind::ExpTilt && m.eta.size() != dim())
            throw SchemaError("exponential tilt dimension mismatch");
        if (m.kind == Modifier::Kind::LogTame && m.n < 1)
            throw SchemaError("log-tame modifier needs n >= 1");
    }
}

// ===========================================================================
// JumpMeasure
// ===========================================================================

void JumpMeasure::validate() const {
    for (const Atom& a : atoms) {
        if (a.x.size() != dim)
            throw SchemaError("atom dimension mismatch");
        if (!(a.rate > 0) || !std::isfinite(a.rate))
            throw SchemaError("atom rates must be positive and finite");
        if (a.x.norm() == 0.0)
            throw SchemaError("jump measures may not charge the origin");
        for (int i = 0; i < dim; ++i)
            if (!std::isfinite(a.x(i))) throw SchemaError("atom location must be finite");
    }
    for (const DensitySegment& s : segments) {
        if (s.dim() != dim) throw SchemaError("density segment dimension mismatch");
        s.check();
        const TailLaw law = s.tail_law();
        if (law.moment(0.0) != TailLaw::Verdict::Converges)
            throw InvariantViolation(
                "not a Levy measure: density segment has infinite tail mass");
    }
}

// ===========================================================================
// Integration
// ===========================================================================

namespace {

// Numeric u-panels with geometric extension plus the analytic completion
// C u^-betaEff exp(-r u) beyond the frontier. h must be the full u-space
// integrand. Returns a tagged infinity on clean divergence.
ExtReal tail_numeric(const std::function<double(double)>& h, double u0,
                     bool fastDecay, double r, double betaEff,
                     const quad::Options& opt) {
    // Analytically divergent laws never reach the panel loop.
    if (!fastDecay && (r < -1e-13 || (std::abs(r) <= 1e-13 && betaEff <= 1.0 + 1e-9))) {
        double c = 0.0;
        for (double du : {0.5, 1.5, 3.0, 6.0}) {
            const double v = h(u0 + du);
            if (std::abs(v) > std::abs(c)) c = v;
        }
        if (c > 0) return ExtReal::pos_inf();
        if (c < 0) return ExtReal::neg_inf();
        return ExtReal::finite(0.0);
    }

    quad::Options local = opt;
    local.absTol = opt.absTol * 0.02;

    const double uCap = 500.0;
    double total = 0.0;
    double edge = u0;
    double len = 1.0;
    double prev1 = kInf, prev2 = kInf;
    while (edge < uCap) {
        const double next = std::min(edge + len, uCap);
        const double part = quad::adaptive_finite(h, edge, next, local);
        total += part;
        edge = next;
        len *= 2.0;
        prev2 = prev1;
        prev1 = std::abs(part);
        if (prev1 < opt.absTol * 0.01 && prev2 < opt.absTol * 0.01) break;
    }

    if (fastDecay) {
        if (edge >= uCap && !(prev1 < opt.absTol && prev2 < opt.absTol))
            throw QuadratureDivergence("tail integral failed to settle under fast-decay law");
        return ExtReal::finite(total);
    }

    // Completion: remainder = h(U) * int_0^inf (1+v/U)^-betaEff e^{-r v} dv.
    const double U = edge;
    const double hU = h(U);
    double remainder = 0.0;
    if (hU != 0.0) {
        if (std::abs(r) <= 1e-13) {
            remainder = hU * U / (betaEff - 1.0);
        } else {
            const double vMax = 60.0 / r;
            quad::Options copt = opt;
            copt.absTol = std::max(opt.absTol * 0.1 / std::max(std::abs(hU), 1e-300), 1e-14);
            copt.relTol = 1e-10;
            const double shape = quad::adaptive_with_breakpoints(
                [&](double v) { return std::pow(1.0 + v / U, -betaEff) * std::exp(-r * v); },
                0.0, vMax, {1.0 / r, 8.0 / r}, copt);
            remainder = hU * shape;
        }
    }
    return ExtReal::finite(total + remainder);
}

// Integrate F against an unbounded 1-d segment from |x| = max(support, floor).
ExtReal segment_tail_part(const DensitySegment& seg, const Integrand& F,
                          double absFloor, const quad::Options& opt) {
    const int dir = seg.tail_dir();
    const TailLaw law = seg.tail_law();
    const double xa = std::max(std::abs(dir > 0 ? seg.support().lo : seg.support().hi),
                               absFloor);
    const double u0 = std::log1p(xa);
    const bool fast = law.gamma > 0 || law.delta > 0;

    auto hval = [&](const std::function<double(double)>& fx) {
        return [&seg, dir, fx](double u) {
            const double ax = std::expm1(u);
            const double x = dir * ax;
            const double d = seg.density1(x);
            if (d == 0.0) return 0.0;
            return fx(x) * d * std::exp(u);
        };
    };

    switch (F.growth) {
        case Integrand::Growth::BoundedLimit: {
            auto h = hval([&](double x) {
                Vec v(1);
                v << x;
                return F.f(v);
            });
            return tail_numeric(h, u0, fast, law.alpha - 1.0, law.beta, opt);
        }
        case Integrand::Growth::Linear: {
            auto h = hval([&](double x) {
                Vec v(1);
                v << x;
                return F.f(v);
            });
            return tail_numeric(h, u0, fast, law.alpha - 2.0, law.beta, opt);
        }
        case Integrand::Growth::Logarithmic: {
            if (!F.logCoeff)
                throw LevyError("logarithmic integrand needs a logCoeff callback");
            const double kap = F.logCoeff(dir);
            // Split off kap*log(1+|x|), which is exactly u in these
            // coordinates; the remainder has a bounded limit.
            auto hrest = hval([&](double x) {
                Vec v(1);
                v << x;
                return F.f(v) - kap * std::log1p(std::abs(x));
            });
            ExtReal rest = tail_numeric(hrest, u0, fast, law.alpha - 1.0, law.beta, opt);
            if (kap == 0.0) return rest;
            auto hlog = hval([](double x) { return std::log1p(std::abs(x)); });
            ExtReal logPart =
                tail_numeric(hlog, u0, fast, law.alpha - 1.0, law.beta - 1.0, opt);
            if (logPart.is_finite())
                return rest + ExtReal::finite(kap * logPart.value());
            return rest + (kap > 0 ? logPart : -logPart);
        }
    }
    throw LevyError("unreachable integrand growth class");
}

double finite_1d_part(const DensitySegment& seg, const Integrand& F, double lo,
                      double hi, const quad::Options& opt) {
    if (!(lo < hi)) return 0.0;
    auto f = [&](double x) {
        const double d = seg.density1(x);
        if (d == 0.0) return 0.0;
        Vec v(1);
        v << x;
        return F.f(v) * d;
    };
    return quad::adaptive_with_breakpoints(f, lo, hi, {-1.0, 0.0, 1.0}, opt);
}

double box_integral(const DensitySegment& seg, const Integrand& F,
                    const quad::Options& opt) {
    const int d = seg.dim();
    Vec x(d);
    std::function<double(int, const quad::Options&)> rec =
        [&](int i, const quad::Options& o) -> double {
        const Family1D& fam = seg.factors[i];
        auto f = [&](double xi) {
            x(i) = xi;
            if (i + 1 == d) {
                const double dens = seg.density(x);
                return dens == 0.0 ? 0.0 : F.f(x) * dens;
            }
            quad::Options inner = o;
            inner.absTol = o.absTol * 0.5;
            return rec(i + 1, inner);
        };
        return quad::adaptive_with_breakpoints(f, fam.lo, fam.hi, {-1.0, 0.0, 1.0}, o);
    };
    quad::Options outer = opt;
    outer.absTol = opt.absTol * 0.5;
    // Keep tensor recursion affordable: relax inner panel depth slightly.
    outer.maxDepth = std::min(opt.maxDepth, 24);
    return rec(0, outer);
}

}  // namespace

ExtReal integrate_segment(const DensitySegment& seg, const Integrand& F,
                          const quad::Options& opt) {
    if (seg.dim() > 1) return ExtReal::finite(box_integral(seg, F, opt));

    const SupportRegion sup = seg.support();
    if (!seg.unbounded())
        return ExtReal::finite(finite_1d_part(seg, F, sup.lo, sup.hi, opt));

    const int dir = seg.tail_dir();
    // Finite-interval part between the support edge and |x| = 1 (if any),
    // then the genuine tail beyond max(1, inner edge).
    double finitePart = 0.0;
    if (dir > 0 && sup.lo < 1.0)
        finitePart = finite_1d_part(seg, F, sup.lo, 1.0, opt);
    if (dir < 0 && sup.hi > -1.0)
        finitePart = finite_1d_part(seg, F, -1.0, sup.hi, opt);

    ExtReal tail = segment_tail_part(seg, F, 1.0, opt);
    if (!tail.is_finite()) return tail;
    return ExtReal::finite(finitePart + tail.value());
}

ExtReal integrate_measure(const JumpMeasure& nu, const Integrand& F,
                          const quad::Options& opt) {
    double finiteSum = 0.0;
    bool posInf = false, negInf = false;
    for (const Atom& a : nu.atoms) finiteSum += a.rate * F.f(a.x);
    if (!std::isfinite(finiteSum))
        throw QuadratureDivergence("non-finite atom contribution to measure integral");
    for (const DensitySegment& s : nu.segments) {
        const ExtReal part = integrate_segment(s, F, opt);
        if (part.is_pos_inf())
            posInf = true;
        else if (part.is_neg_inf())
            negInf = true;
        else
            finiteSum += part.value();
    }
    if (posInf && negInf)
        throw QuadratureDivergence("measure integral diverges with mixed signs");
    if (posInf) return ExtReal::pos_inf();
    if (negInf) return ExtReal::neg_inf();
    return ExtReal::finite(finiteSum);
}

ExtReal integrate_measure(const JumpMeasure& nu,
                          const std::function<double(const Vec&)>& f,
                          const quad::Options& opt) {
    Integrand F;
    F.f = f;
    return integrate_measure(nu, F, opt);
}

double segment_mass_above(const DensitySegment& seg, double eps,
                          const quad::Options& opt) {
    if (!(eps >= 0)) throw SchemaError("mass threshold must be nonnegative");
    Integrand one;
    one.growth = Integrand::Growth::BoundedLimit;
    one.f = [](const Vec&) { return 1.0; };

    if (seg.dim() > 1) {
        if (eps > 0.0)
            one.f = [eps](const Vec& x) { return x.norm() > eps ? 1.0 : 0.0; };
        return box_integral(seg, one, opt);
    }

    const SupportRegion sup = seg.support();
    double mass = 0.0;
    if (!seg.unbounded()) {
        mass += finite_1d_part(seg, one, std::max(sup.lo, eps), sup.hi, opt);
        mass += finite_1d_part(seg, one, sup.lo, std::min(sup.hi, -eps), opt);
        return mass;
    }

    const int dir = seg.tail_dir();
    if (dir > 0) {
        if (eps < 1.0 && sup.lo < 1.0)
            mass += finite_1d_part(seg, one, std::max(sup.lo, eps), 1.0, opt);
    } else {
        if (eps < 1.0 && sup.hi > -1.0)
            mass += finite_1d_part(seg, one, -1.0, std::min(sup.hi, -eps), opt);
    }
    // Negative-direction supports live entirely on the dir side, so the
    // opposite half-line carries no mass and needs no term here.
    const ExtReal tail = segment_tail_part(seg, one, std::max(eps, 1.0), opt);
    return mass + tail.expect_finite("segment tail mass diverged");
}

}  // namespace levy
