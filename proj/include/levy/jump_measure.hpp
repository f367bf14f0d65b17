#pragma once
// Jump measures: finitely many atoms plus a closed catalog of density
// segments. One-dimensional families: polynomial densities on an interval,
// power-law tails |x|^-p, power-log tails |x|^-1 (log(1+|x|))^-q; any member
// may carry multiplicative modifiers (exponential tilts from measure
// transforms, log-taming factors from the approximation scheme). In
// dimension > 1, density segments are product-form on bounded boxes.

#include <functional>
#include <optional>
#include <vector>

#include "levy/common.hpp"
#include "levy/quadrature.hpp"

namespace levy {

// Tail function catalog for exponential tilts: Zero, or the quadratic
// lightening g(x) = |x|^2 - 1 on {|x| > 1} (0 inside the unit ball).
enum class GTag { Zero, QuadraticTail };

double g_val(GTag g, double normx);

// ---------------------------------------------------------------------------
// Support regions
// ---------------------------------------------------------------------------

struct SupportRegion {
    enum class Kind { Interval, Box, HalfLine, AtomCloud };
    Kind kind = Kind::Interval;

    // Interval (1-d): endpoints, +-inf allowed.
    double lo = 0.0, hi = 0.0;
    // Box: per-coordinate bounds, +-inf allowed.
    Vec lower, upper;
    // HalfLine: {offset + t*direction : t >= 0}.
    Vec offset, direction;
    // AtomCloud: finite point list.
    std::vector<Vec> points;

    static SupportRegion interval(double lo, double hi);
    static SupportRegion box(Vec lower, Vec upper);
    static SupportRegion half_line(Vec offset, Vec direction);
    static SupportRegion atom_cloud(std::vector<Vec> points);

    int dim() const;
    // inf over the region of p.x (tagged; -inf possible).
    ExtReal inf_dot(const Vec& p) const;
    // A finite point set whose linear span equals the span of the region.
    std::vector<Vec> span_points() const;
};

// ---------------------------------------------------------------------------
// 1-d density families and modifiers
// ---------------------------------------------------------------------------

struct Family1D {
    enum class Kind { PolynomialOnInterval, PowerLawTail, PowerLogTail };
    Kind kind = Kind::PolynomialOnInterval;

    // PolynomialOnInterval: density sum_k coeffs[k] x^k on [lo, hi].
    std::vector<double> coeffs;
    double lo = 0.0, hi = 0.0;

    // PowerLawTail: scale * |x|^-p     on  [x0, inf) (dir=+1) or (-inf, -x0] (dir=-1).
    // PowerLogTail: scale * |x|^-1 (log(1+|x|))^-q on the same half-lines; x0 >= 1.
    double p = 0.0, q = 0.0, x0 = 1.0, scale = 1.0;
    int dir = +1;

    static Family1D polynomial(std::vector<double> coeffs, double lo, double hi);
    static Family1D power_law(double p, double x0, double scale, int dir);
    static Family1D power_log(double q, double x0, double scale, int dir);

    double eval(double x) const;  // 0 outside the support
    double support_lo() const;
    double support_hi() const;
    bool unbounded() const { return kind != Kind::PolynomialOnInterval; }
    void check() const;  // structural parameter sanity (throws SchemaError)
};

struct Modifier {
    enum class Kind { ExpTilt, LogTame };
    Kind kind = Kind::ExpTilt;

    Vec eta;                 // ExpTilt: exp(-eta.x - g(x))
    GTag g = GTag::Zero;
    int n = 1;               // LogTame: |x|^{-1/n} on {|x| > 1}, 1 inside

    static Modifier exp_tilt(Vec eta, GTag g);
    static Modifier log_tame(int n);

    double eval(const Vec& x) const;
    double eval1(double x) const;
};

// ---------------------------------------------------------------------------
// Density segments
// ---------------------------------------------------------------------------

struct DensitySegment {
    // One factor per coordinate. dim()==1 segments may be unbounded; for
    // dim()>1 all factors must be bounded intervals (validated).
    std::vector<Family1D> factors;
    std::vector<Modifier> modifiers;

    int dim() const { return static_cast<int>(factors.size()); }
    bool unbounded() const;
    int tail_dir() const;  // +-1 for unbounded 1-d segments

    double density(const Vec& x) const;
    double density1(double x) const;

    SupportRegion support() const;

    // Asymptotic law of the density along its unbounded tail, with modifier
    // contributions folded in (alpha += 1/n per log-tame, gamma += dir.eta,
    // delta += quadratic-tail tilts).
    TailLaw tail_law() const;

    void check() const;
};

// ---------------------------------------------------------------------------
// Jump measures
// ---------------------------------------------------------------------------

struct Atom {
    Vec x;
    double rate = 0.0;
};

struct JumpMeasure {
    int dim = 1;
    std::vector<Atom> atoms;
    std::vector<DensitySegment> segments;

    bool is_zero() const { return atoms.empty() && segments.empty(); }

    // Structural + Levy-measure validity: positive rates, no atom at the
    // origin, finite (1 ^ |x|^2)-mass, bounded boxes in dim>1.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Integration against a jump measure
// ---------------------------------------------------------------------------

struct Integrand {
    std::function<double(const Vec&)> f;

    // Growth class of f along unbounded tails; drives the analytic tail
    // completion. Logarithmic integrands must provide logCoeff(dir) =
    // lim f(x)/log(1+|x|) along the tail with direction dir.
    enum class Growth { BoundedLimit, Linear, Logarithmic };
    Growth growth = Growth::BoundedLimit;
    std::function<double(int)> logCoeff;
};

// Integral of f against the segment's density. Finite-interval segments use
// breakpointed adaptive panels; unbounded 1-d tails are integrated in
// u = log(1+|x|) coordinates with geometric panel extension and an analytic
// completion term beyond the numeric frontier. Returns +-inf (tagged) on
// clean monotone divergence.
ExtReal integrate_segment(const DensitySegment& seg, const Integrand& F,
                          const quad::Options& opt = {});

// Atoms + all segments. Infinite contributions of mixed sign are an error.
ExtReal integrate_measure(const JumpMeasure& nu, const Integrand& F,
                          const quad::Options& opt = {});

// Convenience for a bounded-limit scalar integrand.
ExtReal integrate_measure(const JumpMeasure& nu,
                          const std::function<double(const Vec&)>& f,
                          const quad::Options& opt = {});

// Mass of the segment restricted to {|x| > eps} (eps >= 0).
double segment_mass_above(const DensitySegment& seg, double eps,
                          const quad::Options& opt = {});

}  // namespace levy
