#include "levy/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "levy/arbitrage.hpp"
#include "levy/esscher.hpp"
#include "levy/levy_core.hpp"
#include "levy/numeraire.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace levy {
namespace {

constexpr double kInfD = std::numeric_limits<double>::infinity();

// Sizes beyond this are clamped. The affected tails have no first moment, so
// no finite-moment statistic can tell the difference, while wealth ratios
// agree with the unclamped value to ~1e-12 relative.
constexpr double kSizeClamp = 1e12;

constexpr int kMaxRejection = 200000;

std::string vec_str(const Vec& v) {
    std::string out = "(";
    char buf[40];
    for (int i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6g", v(i));
        out += buf;
        if (i + 1 < v.size()) out += ", ";
    }
    return out + ")";
}

// ---------------------------------------------------------------------------
// Rejection-sampler precomputation
// ---------------------------------------------------------------------------

// Rigorous bound for |poly| on [a, b]: dense scan plus a Lipschitz slack.
double poly_sup(const std::vector<double>& coeffs, double a, double b) {
    const double mx = std::max(std::abs(a), std::abs(b));
    double lip = 0.0;
    for (std::size_t k = 1; k < coeffs.size(); ++k)
        lip += std::abs(coeffs[k]) * static_cast<double>(k) *
               std::pow(mx, static_cast<double>(k - 1));
    const int n = 2048;
    const double h = (b - a) / n;
    double best = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = (i == n) ? b : a + h * i;
        double v = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) v = v * x + coeffs[k];
        best = std::max(best, std::abs(v));
    }
    return best + lip * h * 0.5;
}

// Max of the base family density on [a, b] (tails are monotone in |x|).
double family_sup(const Family1D& fam, double a, double b) {
    if (fam.kind == Family1D::Kind::PolynomialOnInterval)
        return poly_sup(fam.coeffs, a, b);
    return fam.eval(fam.dir > 0 ? a : b);
}

// Max of one modifier factor over the 1-d interval [a, b].
double modifier_sup_1d(const Modifier& m, double a, double b) {
    if (m.kind == Modifier::Kind::LogTame) {
        const double minAbs =
            (a <= 0.0 && b >= 0.0) ? 0.0 : std::min(std::abs(a), std::abs(b));
        return minAbs <= 1.0 ? 1.0 : std::pow(minAbs, -1.0 / m.n);
    }
    // exp(-eta x - g(x)): check endpoints, the unit-ball kinks, and the
    // quadratic-tail critical point -eta/2.
    const double eta0 = m.eta(0);
    auto h = [&](double x) { return -eta0 * x - g_val(m.g, std::abs(x)); };
    double best = std::max(h(a), h(b));
    for (double cand : {-1.0, 1.0, m.g == GTag::Zero ? a : -eta0 / 2.0})
        if (cand >= a && cand <= b) best = std::max(best, h(cand));
    return std::exp(best);
}

// Dispatch tags for tail samplers on t = |x| in [t0, inf).
struct TailSpec {
    int which = 0;     // 1 log-envelope, 2 power inverse-CDF, 3 truncated
                       // normal, 4 tangent exponential
    bool logFamily = false;
    double t0 = 1.0;
    double peff = 0.0;   // power exponent with log-taming folded in
    double q = 0.0;      // log exponent (log families only)
    double taming = 0.0; // sum of 1/n over log-tame modifiers
    double etaD = 0.0;   // tilt exponent along the tail direction
    double q2 = 0.0;     // number of quadratic-tail tilts
    double muStar = 0.0, sigma = 0.0;  // case 3
    double r = 0.0, r0 = 0.0, peak = 0.0;  // case 4
};

// One Poisson arrival stream: either a bounded interval sampled by uniform
// rejection under an exact envelope, or an unbounded tail.
struct Piece {
    int segIndex = -1;
    double rate = 0.0;
    bool isTail = false;
    // bounded
    double a = 0.0, b = 0.0;
    double envelope = 0.0;
    // tail
    int dirSign = +1;
    TailSpec ts;
};

struct BoxPiece {
    int segIndex = -1;
    double rate = 0.0;
    Vec lo, hi, width;
    double envelope = 0.0;
};

struct JumpEngine {
    const LevyTriplet* trip = nullptr;
    double eps = 1e-3;
    Vec driftAdj;
    bool hasGauss = false;
    Mat gaussL;
    std::vector<Piece> pieces;   // 1-d segments, in segment order
    std::vector<BoxPiece> boxes; // multi-d segments, in segment order
};

TailSpec make_tail_spec(const DensitySegment& seg) {
    const Family1D& fam = seg.factors[0];
    TailSpec ts;
    ts.logFamily = fam.kind == Family1D::Kind::PowerLogTail;
    ts.t0 = std::max(fam.x0, 1.0);
    ts.q = ts.logFamily ? fam.q : 0.0;
    for (const Modifier& m : seg.modifiers) {
        if (m.kind == Modifier::Kind::LogTame)
            ts.taming += 1.0 / m.n;
        else {
            ts.etaD += m.eta(0) * fam.dir;
            if (m.g == GTag::QuadraticTail) ts.q2 += 1.0;
        }
    }
    ts.peff = (ts.logFamily ? 1.0 : fam.p) + ts.taming;

    if (ts.etaD >= 0.0) {
        if (ts.logFamily && ts.q > 1.0)
            ts.which = 1;
        else if (ts.peff > 1.0)
            ts.which = 2;
        else
            ts.which = 4;
    } else if (ts.q2 > 0.0) {
        ts.muStar = -ts.etaD / (2.0 * ts.q2);
        if (ts.muStar > ts.t0) {
            ts.which = 3;
            ts.sigma = 1.0 / std::sqrt(2.0 * ts.q2);
        } else {
            ts.which = 4;
        }
    } else {
        throw UnsupportedVariant(
            "tail density grows along its own direction; its mass cannot be "
            "finite, so it cannot be sampled");
    }
    if (ts.which == 4) {
        ts.r0 = ts.etaD + 2.0 * ts.q2 * ts.t0;
        if (ts.r0 > 1e-12)
            ts.r = ts.r0;
        else if (ts.q2 > 0.0)
            ts.r = std::sqrt(2.0 * ts.q2);
        else
            throw UnsupportedVariant(
                "tail density decays too slowly to normalize; it cannot be "
                "sampled");
        ts.peak = ts.q2 > 0.0
                      ? (ts.r - ts.r0) * (ts.r - ts.r0) / (4.0 * ts.q2)
                      : 0.0;
    }
    return ts;
}

// Bounded sub-intervals of a 1-d segment outside |x| <= eps, split at the
// unit-ball kinks so every piece has a smooth density.
void add_bounded_pieces(std::vector<Piece>& out, const DensitySegment& seg,
                        int segIndex, double lo, double hi, double eps,
                        const quad::Options& qopt) {
    std::vector<double> cuts = {lo, hi};
    for (double c : {-1.0, -eps, eps, 1.0})
        if (c > lo && c < hi) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (!(b > a)) continue;
        if (a >= -eps && b <= eps) continue;  // dropped small jumps
        Piece p;
        p.segIndex = segIndex;
        p.a = a;
        p.b = b;
        p.rate = quad::adaptive_finite([&](double x) { return seg.density1(x); },
                                       a, b, qopt);
        double env = family_sup(seg.factors[0], a, b);
        for (const Modifier& m : seg.modifiers) env *= modifier_sup_1d(m, a, b);
        p.envelope = env * (1.0 + 1e-12);
        if (p.rate > 0.0) out.push_back(p);
    }
}

JumpEngine build_engine(const LevyTriplet& trip, double eps,
                        const quad::Options& qopt) {
    JumpEngine eng;
    eng.trip = &trip;
    eng.eps = eps;
    const int d = trip.dim;

    eng.hasGauss = trip.c.size() > 0 && trip.c.norm() > 0.0;
    if (eng.hasGauss) {
        Eigen::SelfAdjointEigenSolver<Mat> es(trip.c);
        const Vec ev = es.eigenvalues();
        const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
        if (ev.minCoeff() < -1e-10 * scale)
            throw CholeskyFailure(
                "Gaussian covariance has a negative eigenvalue (" +
                std::to_string(ev.minCoeff()) + "); no PSD square root");
        eng.gaussL =
            es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }

    eng.driftAdj = trip.b;
    for (const Atom& a : trip.nu.atoms)
        if (a.x.norm() <= 1.0) eng.driftAdj -= a.rate * a.x;

    for (std::size_t s = 0; s < trip.nu.segments.size(); ++s) {
        const DensitySegment& seg = trip.nu.segments[s];
        if (seg.dim() > 1) {
            BoxPiece bp;
            bp.segIndex = static_cast<int>(s);
            Integrand one;
            one.f = [](const Vec&) { return 1.0; };
            bp.rate = integrate_segment(seg, one, qopt)
                          .expect_finite("multi-asset segment mass");
            bp.lo = Vec(d);
            bp.hi = Vec(d);
            double env = 1.0;
            for (int k = 0; k < d; ++k) {
                bp.lo(k) = seg.factors[k].lo;
                bp.hi(k) = seg.factors[k].hi;
                env *= poly_sup(seg.factors[k].coeffs, bp.lo(k), bp.hi(k));
            }
            bp.width = bp.hi - bp.lo;
            for (const Modifier& m : seg.modifiers) {
                if (m.kind == Modifier::Kind::LogTame) continue;  // <= 1
                double ex = 0.0;  // max of -eta.x over the box; exp(-g) <= 1
                for (int k = 0; k < d; ++k)
                    ex += std::max(-m.eta(k) * bp.lo(k), -m.eta(k) * bp.hi(k));
                env *= std::exp(ex);
            }
            bp.envelope = env * (1.0 + 1e-12);
            if (bp.rate > 0.0) eng.boxes.push_back(bp);
            // All box jumps are simulated, so compensate the full unit-ball
            // mean of this segment.
            for (int k = 0; k < d; ++k) {
                Integrand xk;
                xk.f = [k](const Vec& x) {
                    return x.norm() <= 1.0 ? x(k) : 0.0;
                };
                eng.driftAdj(k) -=
                    integrate_segment(seg, xk, qopt)
                        .expect_finite("small-jump compensator");
            }
            continue;
        }

        const Family1D& fam = seg.factors[0];
        if (fam.kind == Family1D::Kind::PolynomialOnInterval) {
            add_bounded_pieces(eng.pieces, seg, static_cast<int>(s), fam.lo,
                               fam.hi, eps, qopt);
        } else {
            // Bounded stretch between the support edge and |x| = 1, if any.
            if (fam.x0 < 1.0) {
                if (fam.dir > 0)
                    add_bounded_pieces(eng.pieces, seg, static_cast<int>(s),
                                       fam.x0, 1.0, eps, qopt);
                else
                    add_bounded_pieces(eng.pieces, seg, static_cast<int>(s),
                                       -1.0, -fam.x0, eps, qopt);
            }
            Piece p;
            p.segIndex = static_cast<int>(s);
            p.isTail = true;
            p.dirSign = fam.dir;
            p.ts = make_tail_spec(seg);
            p.rate = segment_mass_above(seg, 1.0, qopt);
            if (p.rate > 0.0) eng.pieces.push_back(p);
        }

        // Compensate the simulated jumps inside the unit ball: the segment's
        // x-mean over eps < |x| <= 1.
        auto xdens = [&](double x) { return x * seg.density1(x); };
        const double slo = fam.support_lo(), shi = fam.support_hi();
        double comp = 0.0;
        const double aPos = std::max(slo, eps), bPos = std::min(shi, 1.0);
        if (bPos > aPos) comp += quad::adaptive_finite(xdens, aPos, bPos, qopt);
        const double aNeg = std::max(slo, -1.0), bNeg = std::min(shi, -eps);
        if (bNeg > aNeg) comp += quad::adaptive_finite(xdens, aNeg, bNeg, qopt);
        eng.driftAdj(0) -= comp;
    }
    return eng;
}

// ---------------------------------------------------------------------------
// Size samplers
// ---------------------------------------------------------------------------

double tilt_accept(const TailSpec& ts, double t) {
    if (ts.etaD == 0.0 && ts.q2 == 0.0) return 1.0;
    const double h = -ts.etaD * t - ts.q2 * (t * t - 1.0);
    const double h0 = -ts.etaD * ts.t0 - ts.q2 * (ts.t0 * ts.t0 - 1.0);
    return std::exp(h - h0);
}

double log_ratio(const TailSpec& ts, double t) {
    if (!ts.logFamily || ts.q == 0.0) return 1.0;
    return std::pow(std::log1p(t) / std::log1p(ts.t0), -ts.q);
}

double draw_tail(const TailSpec& ts, rng::Stream& st, long& clamped) {
    for (int it = 0; it < kMaxRejection; ++it) {
        double t = 0.0, acc = 0.0;
        switch (ts.which) {
            case 1: {  // (1+t)^-1 log(1+t)^-q envelope, exact inverse CDF
                const double w =
                    std::pow(st.uniform(), -1.0 / (ts.q - 1.0));
                t = std::expm1(std::log1p(ts.t0) * w);
                acc = 0.5 * (1.0 + 1.0 / t) * std::pow(t, -ts.taming) *
                      tilt_accept(ts, t);
                break;
            }
            case 2: {  // exact power-law inverse CDF
                t = ts.t0 * std::pow(st.uniform(), -1.0 / (ts.peff - 1.0));
                acc = log_ratio(ts, t) * tilt_accept(ts, t);
                break;
            }
            case 3: {  // normal centered at the tilt peak
                t = ts.muStar + ts.sigma * st.normal();
                if (!(t >= ts.t0)) continue;
                acc = std::pow(t / ts.t0, -ts.peff) * log_ratio(ts, t);
                break;
            }
            case 4: {  // exponential tangent to the tilt exponent at t0
                t = ts.t0 + st.exponential(ts.r);
                const double u = t - ts.t0;
                acc = std::exp(-ts.q2 * u * u + (ts.r - ts.r0) * u - ts.peak) *
                      std::pow(t / ts.t0, -ts.peff) * log_ratio(ts, t);
                break;
            }
            default:
                throw LevyError("unreachable tail sampler tag");
        }
        if (st.uniform() <= acc) {
            if (!(t <= kSizeClamp)) {
                t = kSizeClamp;
                ++clamped;
            }
            return t;
        }
    }
    throw ConvergenceFailure(
        "tail rejection sampler made no progress after " +
        std::to_string(kMaxRejection) + " proposals");
}

double draw_bounded(const Piece& p, const DensitySegment& seg,
                    rng::Stream& st) {
    for (int it = 0; it < kMaxRejection; ++it) {
        const double x = p.a + st.uniform() * (p.b - p.a);
        const double f = seg.density1(x);
        if (f > p.envelope)
            throw ConvergenceFailure(
                "density exceeds its rejection envelope on [" +
                std::to_string(p.a) + ", " + std::to_string(p.b) + "]");
        if (st.uniform() * p.envelope <= f) return x;
    }
    throw ConvergenceFailure(
        "interval rejection sampler made no progress after " +
        std::to_string(kMaxRejection) + " proposals");
}

Vec draw_box(const BoxPiece& bp, const DensitySegment& seg, rng::Stream& st) {
    const int d = static_cast<int>(bp.lo.size());
    Vec x(d);
    for (int it = 0; it < kMaxRejection; ++it) {
        for (int k = 0; k < d; ++k)
            x(k) = bp.lo(k) + st.uniform() * bp.width(k);
        const double f = seg.density(x);
        if (f > bp.envelope)
            throw ConvergenceFailure(
                "box density exceeds its rejection envelope");
        if (st.uniform() * bp.envelope <= f) return x;
    }
    throw ConvergenceFailure(
        "box rejection sampler made no progress after " +
        std::to_string(kMaxRejection) + " proposals");
}

// ---------------------------------------------------------------------------
// One path, batch mode
// ---------------------------------------------------------------------------

void simulate_one_path(const JumpEngine& eng, double T, int nSteps,
                       std::uint64_t seed, int pathIdx, SimPath& out,
                       long& clamped) {
    rng::Stream st(seed, static_cast<std::uint64_t>(pathIdx));
    const LevyTriplet& trip = *eng.trip;
    const int d = trip.dim;
    const double tol = 1e-12 * std::max(1.0, T);

    // Draw order: per atom all arrivals; per piece all arrivals then all
    // sizes in time order; per box likewise; normals per interval last.
    std::vector<std::pair<double, Vec>> raw;
    for (const Atom& a : trip.nu.atoms) {
        if (!(a.rate > 0.0)) continue;
        double t = st.exponential(a.rate);
        while (t <= T) {
            raw.emplace_back(t, a.x);
            t += st.exponential(a.rate);
        }
    }
    std::vector<double> arrivals;
    for (const Piece& p : eng.pieces) {
        arrivals.clear();
        double t = st.exponential(p.rate);
        while (t <= T) {
            arrivals.push_back(t);
            t += st.exponential(p.rate);
        }
        const DensitySegment& seg = trip.nu.segments[p.segIndex];
        for (double at : arrivals) {
            Vec x(1);
            if (p.isTail)
                x(0) = p.dirSign * draw_tail(p.ts, st, clamped);
            else
                x(0) = draw_bounded(p, seg, st);
            raw.emplace_back(at, std::move(x));
        }
    }
    for (const BoxPiece& bp : eng.boxes) {
        arrivals.clear();
        double t = st.exponential(bp.rate);
        while (t <= T) {
            arrivals.push_back(t);
            t += st.exponential(bp.rate);
        }
        const DensitySegment& seg = trip.nu.segments[bp.segIndex];
        for (double at : arrivals) raw.emplace_back(at, draw_box(bp, seg, st));
    }
    std::stable_sort(raw.begin(), raw.end(),
                     [](const auto& l, const auto& r) {
                         return l.first < r.first;
                     });
    for (auto& j : raw) j.first = std::min(std::max(j.first, 2.0 * tol), T);

    // Merged grid: uniform points plus exact jump times.
    std::vector<double> grid;
    grid.reserve(nSteps + 1 + raw.size());
    for (int k = 0; k <= nSteps; ++k)
        grid.push_back(k == nSteps ? T : k * T / nSteps);
    for (const auto& j : raw) grid.push_back(j.first);
    std::sort(grid.begin(), grid.end());
    std::vector<double>& times = out.times;
    times.clear();
    times.push_back(0.0);
    for (double t : grid)
        if (t - times.back() > tol) times.push_back(t);
    times.back() = T;

    const int m = static_cast<int>(times.size()) - 1;
    out.incs.assign(static_cast<std::size_t>(m) * d, 0.0);
    out.jumps.clear();
    out.jumps.reserve(raw.size());
    for (auto& j : raw) {
        auto it = std::lower_bound(times.begin(), times.end(), j.first);
        int idx = static_cast<int>(it - times.begin());
        if (idx >= static_cast<int>(times.size()))
            idx = static_cast<int>(times.size()) - 1;
        if (idx > 0 && j.first - times[idx - 1] < times[idx] - j.first)
            --idx;
        if (idx < 1) idx = 1;
        PathJump pj;
        pj.gridIndex = idx;
        pj.time = times[idx];
        pj.x = std::move(j.second);
        for (int k = 0; k < d; ++k)
            out.incs[static_cast<std::size_t>(idx - 1) * d + k] += pj.x(k);
        out.jumps.push_back(std::move(pj));
    }

    Vec z(d);
    for (int i = 0; i < m; ++i) {
        const double dt = times[i + 1] - times[i];
        double* row = &out.incs[static_cast<std::size_t>(i) * d];
        if (eng.hasGauss) {
            for (int k = 0; k < d; ++k) z(k) = st.normal();
            const Vec gz = eng.gaussL * z * std::sqrt(dt);
            for (int k = 0; k < d; ++k) row[k] += gz(k);
        }
        for (int k = 0; k < d; ++k) row[k] += eng.driftAdj(k) * dt;
    }
}

// Run fn(i) for i in [0, n), optionally under OpenMP; the first failure is
// rethrown after the loop so parallel runs stay exception-safe.
template <class F>
void for_each_path(int n, bool parallel, F&& fn) {
#ifdef _OPENMP
    if (parallel) {
        bool failed = false;
        std::string what;
        #pragma omp parallel for schedule(dynamic, 16)
        for (int i = 0; i < n; ++i) {
            if (failed) continue;
            try {
                fn(i);
            } catch (const std::exception& e) {
                #pragma omp critical
                {
                    if (!failed) {
                        failed = true;
                        what = e.what();
                    }
                }
            }
        }
        if (failed) throw ConvergenceFailure(what);
        return;
    }
#else
    (void)parallel;
#endif
    for (int i = 0; i < n; ++i) fn(i);
}

void mean_se(const std::vector<double>& v, double& mean, double& se) {
    const std::size_t n = v.size();
    double s = 0.0;
    for (double x : v) s += x;
    mean = s / static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / (static_cast<double>(n) *
                         std::max<double>(1.0, static_cast<double>(n - 1))));
}

// Index of the last grid time <= t (plus tolerance).
int index_at(const std::vector<double>& times, double t) {
    const double tol = 1e-12 * std::max(1.0, times.back());
    auto it = std::upper_bound(times.begin(), times.end(), t + tol);
    return std::max<int>(0, static_cast<int>(it - times.begin()) - 1);
}

// Additive log-wealth walk: log W_T per path, immune to overflow.
std::vector<double> log_terminal_wealth(const LevyTriplet& trip,
                                        const PathBundle& bundle,
                                        const Vec& pi) {
    const int d = trip.dim;
    const double quadTerm = 0.5 * pi.dot(trip.c * pi);
    std::vector<double> out(bundle.paths.size(), 0.0);
    for (std::size_t pth = 0; pth < bundle.paths.size(); ++pth) {
        const SimPath& path = bundle.paths[pth];
        const int m = path.intervals();
        double lw = 0.0;
        std::size_t jp = 0;
        for (int i = 0; i < m; ++i) {
            const double dt = path.times[i + 1] - path.times[i];
            double cont = 0.0;
            for (int k = 0; k < d; ++k)
                cont += pi(k) * path.incs[static_cast<std::size_t>(i) * d + k];
            while (jp < path.jumps.size() &&
                   path.jumps[jp].gridIndex == i + 1) {
                const double jx = pi.dot(path.jumps[jp].x);
                cont -= jx;
                lw += std::log1p(jx);
                ++jp;
            }
            lw += cont - quadTerm * dt;
        }
        out[pth] = lw;
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// sample_paths
// ---------------------------------------------------------------------------

PathBundle sample_paths(const LevyTriplet& trip, double T, int nSteps,
                        int nPaths, std::uint64_t seed, const SimOptions& opt,
                        const quad::Options& qopt) {
    trip.validate();
    if (!(T > 0.0) || !std::isfinite(T))
        throw SchemaError("simulation horizon must be a positive time");
    if (nSteps < 1) throw SchemaError("need at least one time step");
    if (nPaths < 1) throw SchemaError("need at least one path");
    if (!(opt.epsilon > 0.0) || !(opt.epsilon <= 1.0))
        throw SchemaError("small-jump cutoff must lie in (0, 1]");

    const JumpEngine eng = build_engine(trip, opt.epsilon, qopt);

    PathBundle bundle;
    bundle.dim = trip.dim;
    bundle.T = T;
    bundle.nSteps = nSteps;
    bundle.epsilon = opt.epsilon;
    bundle.seed = seed;
    bundle.rngFamily = rng::kFamily;
    bundle.paths.resize(nPaths);

    std::vector<long> clamped(nPaths, 0);
    for_each_path(nPaths, opt.parallel, [&](int i) {
        simulate_one_path(eng, T, nSteps, seed, i, bundle.paths[i],
                          clamped[i]);
    });

    long totalClamped = 0;
    for (long c : clamped) totalClamped += c;
    if (totalClamped > 0)
        bundle.notes.push_back(
            std::to_string(totalClamped) +
            " jump size(s) beyond 1e12 clamped; the affected tails have no "
            "first moment, so ratio statistics are unchanged to ~1e-12");
    return bundle;
}

// ---------------------------------------------------------------------------
// wealth_path
// ---------------------------------------------------------------------------

std::vector<std::vector<double>> wealth_path(const LevyTriplet& trip,
                                             const PathBundle& bundle,
                                             const Vec& pi,
                                             const StopPolicy& policy) {
    if (pi.size() != trip.dim)
        throw SchemaError("portfolio dimension does not match the market");
    if (!natural_constraints_contains(trip.nu, pi, 1e-9))
        throw NonPositiveWealth(
            "a single jump can wipe out portfolio " + vec_str(pi) +
            "; wealth would not stay positive");
    const int d = trip.dim;
    const double quadTerm = 0.5 * pi.dot(trip.c * pi);

    std::vector<std::vector<double>> out(bundle.paths.size());
    for (std::size_t pth = 0; pth < bundle.paths.size(); ++pth) {
        const SimPath& path = bundle.paths[pth];
        const int m = path.intervals();
        std::vector<double>& W = out[pth];
        W.resize(m + 1);
        W[0] = 1.0;
        bool stopped = policy.active && W[0] >= policy.level;
        std::size_t jp = 0;
        for (int i = 0; i < m; ++i) {
            double cont = 0.0;
            double jumpFactor = 1.0;
            double jumpTime = 0.0;
            for (int k = 0; k < d; ++k)
                cont += pi(k) * path.incs[static_cast<std::size_t>(i) * d + k];
            while (jp < path.jumps.size() &&
                   path.jumps[jp].gridIndex == i + 1) {
                const double jx = pi.dot(path.jumps[jp].x);
                cont -= jx;
                jumpFactor *= 1.0 + jx;
                jumpTime = path.jumps[jp].time;
                ++jp;
            }
            if (stopped) {
                W[i + 1] = W[i];
                continue;
            }
            if (!(jumpFactor > 0.0))
                throw NonPositiveWealth(
                    "jump at time " + std::to_string(jumpTime) +
                    " drives the wealth of " + vec_str(pi) +
                    " to zero or below");
            const double dt = path.times[i + 1] - path.times[i];
            W[i + 1] = W[i] * std::exp(cont - quadTerm * dt) * jumpFactor;
            if (policy.active && W[i + 1] >= policy.level) stopped = true;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// supermartingale_test
// ---------------------------------------------------------------------------

SimulationReport supermartingale_test(
    const PathBundle& bundle,
    const std::vector<std::vector<double>>& numerator,
    const std::vector<std::vector<double>>& denominator) {
    const std::size_t n = bundle.paths.size();
    if (numerator.size() != n || denominator.size() != n)
        throw SchemaError(
            "wealth arrays do not pair up with the path bundle");

    SimulationReport rep;
    rep.statistic = "relativeWealthMean";
    rep.sampleSize = static_cast<long>(n);
    rep.seed = bundle.seed;
    rep.rngFamily = bundle.rngFamily;

    const double T = bundle.T;
    const struct {
        const char* meanKey;
        const char* seKey;
        double at;
    } cps[3] = {{"meanAtQuarterT", "seAtQuarterT", T / 4.0},
                {"meanAtHalfT", "seAtHalfT", T / 2.0},
                {"meanAtT", "seAtT", T}};

    rep.consistent = true;
    std::vector<double> ratios(n);
    for (const auto& cp : cps) {
        for (std::size_t i = 0; i < n; ++i) {
            const int idx = index_at(bundle.paths[i].times, cp.at);
            ratios[i] = numerator[i][idx] / denominator[i][idx];
        }
        double mean = 0.0, se = 0.0;
        mean_se(ratios, mean, se);
        rep.details[cp.meanKey] = mean;
        rep.details[cp.seKey] = se;
        if (!std::isfinite(mean) || mean > 1.0 + 3.0 * se)
            rep.consistent = false;
        if (cp.at == T) {
            rep.estimate = mean;
            rep.stdError = se;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// increasing_profit_demo
// ---------------------------------------------------------------------------

SimulationReport increasing_profit_demo(const LevyTriplet& trip, const Vec& xi,
                                        double T, int nPaths,
                                        std::uint64_t seed,
                                        const SimOptions& opt,
                                        const quad::Options& qopt) {
    const IncreasingProfit cert =
        increasing_profit_decomposition(trip, xi, qopt);

    const PathBundle bundle = sample_paths(trip, T, 64, nPaths, seed, opt, qopt);
    const auto wealth = wealth_path(trip, bundle, xi);

    long above = 0;
    double meanW = 0.0;
    for (std::size_t i = 0; i < wealth.size(); ++i) {
        const std::vector<double>& W = wealth[i];
        for (std::size_t k = 0; k + 1 < W.size(); ++k)
            if (W[k + 1] < W[k] * (1.0 - 1e-12))
                throw MonotonicityViolation(
                    "wealth along " + vec_str(xi) + " decreased at time " +
                    std::to_string(bundle.paths[i].times[k + 1]) +
                    " on path " + std::to_string(i) +
                    "; the direction is not a never-losing position");
        if (W.back() > 1.0) ++above;
        meanW += W.back();
    }
    meanW /= static_cast<double>(nPaths);
    const double frac = static_cast<double>(above) / nPaths;

    SimulationReport rep;
    rep.statistic = "increasingWealthFraction";
    rep.estimate = frac;
    rep.stdError = std::sqrt(frac * (1.0 - frac) / nPaths);
    rep.consistent = frac > 0.0;
    rep.sampleSize = nPaths;
    rep.seed = seed;
    rep.rngFamily = bundle.rngFamily;
    rep.details["meanTerminalWealth"] = meanW;
    rep.details["gaussianExposure"] = cert.gaussianExposure;
    rep.details["compensatedDrift"] = cert.compensatedDrift;
    rep.details["worstJump"] = cert.worstJump;
    rep.details["positiveJumpRate"] = cert.positiveJumpRate;
    rep.notes.push_back("every simulated path was nondecreasing");
    return rep;
}

// ---------------------------------------------------------------------------
// infinite_horizon_free_lunch_demo
// ---------------------------------------------------------------------------

SimulationReport infinite_horizon_free_lunch_demo(
    const LevyTriplet& trip, const ConstraintSet& C, double level,
    std::uint64_t seed, int nPaths, const SimOptions& opt,
    const quad::Options& qopt) {
    trip.validate();
    if (!(level > 1.0))
        throw SchemaError("target level must exceed the starting wealth 1");
    if (nPaths < 2) throw SchemaError("need at least two paths");

    const SupermartingaleVerdict sm = is_supermartingale_measure(trip, C, qopt);
    if (sm.holds)
        throw InvariantViolation(
            "refusing the demonstration: the market law is a supermartingale "
            "measure for these constraints, so constrained wealth cannot "
            "reach the level almost surely");

    // Preferred portfolio: the growth-optimal one. When it does not exist
    // because the constraints admit an immediate arbitrage, that direction
    // itself serves — its wealth is nondecreasing and still reaches the level.
    Vec rho;
    ExtReal demoGrowth = ExtReal::finite(0.0);
    std::string portfolioNote;
    try {
        const NumeraireResult num = solve_numeraire(trip, C, qopt);
        rho = num.rho;
        demoGrowth = num.growthRate;
        portfolioNote = "growth-optimal portfolio " + vec_str(rho) +
                        " run with a stop-at-level policy";
    } catch (const IaoPresent&) {
        IaoSearch s = find_immediate_arbitrage(trip, C.recession_cone(), qopt);
        if (!s.found) throw;
        rho = s.xi;
        demoGrowth = growth_rate(trip, rho, qopt);
        portfolioNote = "no growth-optimal portfolio exists; running the "
                        "immediate-arbitrage direction " + vec_str(rho) +
                        " with a stop-at-level policy";
    }

    const JumpEngine eng = build_engine(trip, opt.epsilon, qopt);
    const int d = trip.dim;
    const double rhoDrift = rho.dot(eng.driftAdj);
    const double quadTerm = 0.5 * rho.dot(trip.c * rho);
    const double logLevel = std::log(level);
    const double maxDt = eng.hasGauss ? 1.0 / 32.0 : kInfD;

    constexpr int kHorizons = 13;  // 1, 2, 4, ..., 4096
    double horizons[kHorizons];
    for (int k = 0; k < kHorizons; ++k)
        horizons[k] = static_cast<double>(1 << k);

    std::vector<double> hitTimes(nPaths, kInfD);
    std::vector<std::array<double, kHorizons>> wealthAt(nPaths);
    std::vector<long> clamped(nPaths, 0);

    for_each_path(nPaths, opt.parallel, [&](int pi) {
        rng::Stream st(seed, static_cast<std::uint64_t>(pi));
        const std::size_t nAtoms = trip.nu.atoms.size();
        const std::size_t nPieces = eng.pieces.size();
        const std::size_t nBoxes = eng.boxes.size();
        std::vector<double> nextT(nAtoms + nPieces + nBoxes, kInfD);
        for (std::size_t a = 0; a < nAtoms; ++a)
            if (trip.nu.atoms[a].rate > 0.0)
                nextT[a] = st.exponential(trip.nu.atoms[a].rate);
        for (std::size_t p = 0; p < nPieces; ++p)
            nextT[nAtoms + p] = st.exponential(eng.pieces[p].rate);
        for (std::size_t b = 0; b < nBoxes; ++b)
            nextT[nAtoms + nPieces + b] =
                st.exponential(eng.boxes[b].rate);

        double t = 0.0, logW = 0.0;
        int cp = 0;
        Vec z(d);
        while (true) {
            double tNext = std::min(t + maxDt, horizons[cp]);
            for (double nt : nextT) tNext = std::min(tNext, nt);

            const double dt = tNext - t;
            double stepInc = rhoDrift * dt - quadTerm * dt;
            if (eng.hasGauss && dt > 0.0) {
                for (int k = 0; k < d; ++k) z(k) = st.normal();
                stepInc += rho.dot(eng.gaussL * z) * std::sqrt(dt);
            }
            logW += stepInc;
            t = tNext;

            for (std::size_t j = 0; j < nextT.size(); ++j) {
                if (nextT[j] != tNext) continue;
                double jx;
                if (j < nAtoms) {
                    const Atom& a = trip.nu.atoms[j];
                    jx = rho.dot(a.x);
                    nextT[j] = t + st.exponential(a.rate);
                } else if (j < nAtoms + nPieces) {
                    const Piece& p = eng.pieces[j - nAtoms];
                    const DensitySegment& seg = trip.nu.segments[p.segIndex];
                    double x;
                    if (p.isTail)
                        x = p.dirSign * draw_tail(p.ts, st, clamped[pi]);
                    else
                        x = draw_bounded(p, seg, st);
                    jx = rho(0) * x;
                    nextT[j] = t + st.exponential(p.rate);
                } else {
                    const BoxPiece& bp = eng.boxes[j - nAtoms - nPieces];
                    const DensitySegment& seg = trip.nu.segments[bp.segIndex];
                    jx = rho.dot(draw_box(bp, seg, st));
                    nextT[j] = t + st.exponential(bp.rate);
                }
                logW += std::log1p(jx);
            }

            if (t == horizons[cp]) {
                wealthAt[pi][cp] = std::exp(logW);
                ++cp;
            }
            if (logW >= logLevel) {
                hitTimes[pi] = t;
                for (int k = cp; k < kHorizons; ++k)
                    wealthAt[pi][k] = std::exp(logW);
                break;
            }
            if (cp >= kHorizons) break;
        }
    });

    int chosen = -1;
    double frac = 0.0, meanW = 0.0;
    for (int k = 0; k < kHorizons; ++k) {
        long hits = 0;
        double mw = 0.0;
        for (int i = 0; i < nPaths; ++i) {
            if (hitTimes[i] <= horizons[k]) ++hits;
            mw += wealthAt[i][k];
        }
        frac = static_cast<double>(hits) / nPaths;
        meanW = mw / nPaths;
        if (frac >= 0.99) {
            chosen = k;
            break;
        }
    }
    if (chosen < 0) {
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "horizon cap 4096 reached with hit fraction %.4f at "
                      "level %g (mean wealth %.6g over %d paths); partial "
                      "statistics only",
                      frac, level, meanW, nPaths);
        throw HorizonCapReached(buf);
    }

    SimulationReport rep;
    rep.statistic = "levelHitFraction";
    rep.estimate = frac;
    rep.stdError = std::sqrt(frac * (1.0 - frac) / nPaths);
    rep.consistent = meanW >= level * frac * (1.0 - 1e-9);
    rep.sampleSize = nPaths;
    rep.seed = seed;
    rep.rngFamily = rng::kFamily;
    rep.details["horizon"] = horizons[chosen];
    rep.details["level"] = level;
    rep.details["meanTerminalWealth"] = meanW;
    rep.details["growthRate"] = demoGrowth.as_double_unsafe();
    rep.notes.push_back(portfolioNote);
    rep.notes.push_back(
        "drift condition fails in direction " + vec_str(sm.worstDirection) +
        " (value " + sm.worstValue + "), so the level is reached eventually");
    return rep;
}

// ---------------------------------------------------------------------------
// esscher_martingale_check
// ---------------------------------------------------------------------------

SimulationReport esscher_martingale_check(const LevyTriplet& trip,
                                          const EsscherParams& params,
                                          double T, int nPaths,
                                          std::uint64_t seed,
                                          const SimOptions& opt,
                                          const quad::Options& qopt) {
    if (params.eta.size() != trip.dim)
        throw SchemaError("tilt dimension does not match the market");

    const PathBundle bundle = sample_paths(trip, T, 32, nPaths, seed, opt, qopt);
    const int d = trip.dim;

    std::vector<double> zs(nPaths);
    double zMin = kInfD, zMax = -kInfD;
    for (int i = 0; i < nPaths; ++i) {
        const SimPath& path = bundle.paths[i];
        double expo = -T * params.psi;
        const int m = path.intervals();
        for (int r = 0; r < m; ++r)
            for (int k = 0; k < d; ++k)
                expo -= params.eta(k) *
                        path.incs[static_cast<std::size_t>(r) * d + k];
        for (const PathJump& j : path.jumps)
            expo -= g_val(params.g, j.x.norm());
        zs[i] = std::exp(expo);
        zMin = std::min(zMin, zs[i]);
        zMax = std::max(zMax, zs[i]);
    }
    double mean = 0.0, se = 0.0;
    mean_se(zs, mean, se);

    SimulationReport rep;
    rep.statistic = "tiltedDensityMean";
    rep.estimate = mean;
    rep.stdError = se;
    rep.consistent = std::isfinite(mean) && std::abs(mean - 1.0) <= 3.0 * se;
    rep.sampleSize = nPaths;
    rep.seed = seed;
    rep.rngFamily = bundle.rngFamily;
    rep.details["psi"] = params.psi;
    rep.details["horizon"] = T;
    rep.details["minDensity"] = zMin;
    rep.details["maxDensity"] = zMax;
    for (const std::string& n : bundle.notes) rep.notes.push_back(n);
    return rep;
}

// ---------------------------------------------------------------------------
// log_optimality_gap (declared in numeraire.hpp)
// ---------------------------------------------------------------------------

LogOptimalityReport log_optimality_gap(const LevyTriplet& trip,
                                       const ConstraintSet& C, const Vec& rho,
                                       double T, unsigned long long seed,
                                       int paths, const quad::Options& opt) {
    std::vector<Vec> cands;
    cands.push_back(Vec::Zero(trip.dim));
    cands.push_back(rho);
    for (const Vec& p : C.probe_points()) cands.push_back(p);

    std::vector<Vec> pis;
    std::vector<ExtReal> rels;
    for (const Vec& cand : cands) {
        if (pis.size() >= 8) break;
        const Vec q = C.project(cand);
        bool dup = false;
        for (const Vec& have : pis)
            if ((have - q).norm() <= 1e-9) {
                dup = true;
                break;
            }
        if (dup) continue;
        if (!natural_constraints_contains(trip.nu, q, 1e-9)) continue;
        ExtReal rel;
        try {
            rel = rel_rate(trip, q, rho, opt);
        } catch (const LevyError&) {
            continue;
        }
        if (!rel.is_finite()) continue;
        pis.push_back(q);
        rels.push_back(rel);
    }

    const PathBundle bundle =
        sample_paths(trip, T, 32, paths, seed, SimOptions{}, opt);
    const std::vector<double> logRho = log_terminal_wealth(trip, bundle, rho);

    LogOptimalityReport rep;
    rep.allOrdered = true;
    rep.allNonPositive = true;
    for (std::size_t i = 0; i < pis.size(); ++i) {
        const std::vector<double> logPi =
            log_terminal_wealth(trip, bundle, pis[i]);
        std::vector<double> diff(logPi.size());
        for (std::size_t k = 0; k < diff.size(); ++k)
            diff[k] = logPi[k] - logRho[k];
        LogOptimalityEntry e;
        e.pi = pis[i];
        e.analyticLogExpectation = T * rels[i].value();
        mean_se(diff, e.mcLogMean, e.mcLogStdErr);
        e.jensenOrdered = e.analyticLogExpectation >=
                          e.mcLogMean - 3.0 * e.mcLogStdErr - 1e-12;
        // At an approximately solved rho the analytic value is only zero up
        // to (first-order residual) * |pi - rho|, so the sign tolerance must
        // scale with the probe distance.
        const double analyticTol =
            1e-9 * (1.0 + (pis[i] - rho).norm()) * std::max(1.0, T);
        e.nonPositive = e.analyticLogExpectation <= analyticTol &&
                        e.mcLogMean <= 3.0 * e.mcLogStdErr + 1e-12;
        rep.allOrdered = rep.allOrdered && e.jensenOrdered;
        rep.allNonPositive = rep.allNonPositive && e.nonPositive;
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

}  // namespace levy
