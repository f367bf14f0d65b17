#include "levy/numeraire.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "levy/levy_core.hpp"
#include "levy/optimize.hpp"

namespace levy {

namespace {

constexpr double kBarrier = 1e-9;  // distance kept from the ruin boundary
const double kInfD = std::numeric_limits<double>::infinity();

std::string vec_str(const Vec& v) {
    std::string s = "[";
    char buf[40];
    for (int i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6g", v(i));
        if (i) s += ", ";
        s += buf;
    }
    return s + "]";
}

// Strict interior of the natural constraints: every jump leaves a fraction
// of wealth of at least `delta` standing.
bool barrier_admissible(const LevyTriplet& trip, const Vec& pi, double delta) {
    for (const Atom& at : trip.nu.atoms)
        if (pi.dot(at.x) <= -1.0 + delta) return false;
    for (const DensitySegment& seg : trip.nu.segments) {
        const ExtReal lo = seg.support().inf_dot(pi);
        if (lo.is_neg_inf()) return false;
        if (lo.is_finite() && lo.value() <= -1.0 + delta) return false;
    }
    return true;
}

// Shared integral d'b - d'c base + int (d'x / (1 + base'x) - d'x 1_{|x|<=1}).
// This is both the directional derivative of the growth rate at `base` and
// the relative rate of return of `base + d` against `base`.
ExtReal directional_rel(const LevyTriplet& trip, const Vec& base, const Vec& d,
                        const quad::Options& opt) {
    if (base.size() != trip.dim || d.size() != trip.dim)
        throw InvariantViolation("portfolio dimension mismatch");
    double finitePart = d.dot(trip.b) - d.dot(trip.c * base);
    bool posInf = false, negInf = false;

    for (const Atom& at : trip.nu.atoms) {
        const double w = 1.0 + base.dot(at.x);
        const double dx = d.dot(at.x);
        if (w < -1e-12)
            throw LevyError(
                "directional rate undefined: a jump wipes out the base "
                "portfolio (atom " + vec_str(at.x) + ")");
        if (w <= 1e-12) {  // base sits on the ruin boundary of this jump
            if (dx > 1e-14) posInf = true;
            else if (dx < -1e-14) negInf = true;
            continue;
        }
        finitePart += at.rate * (dx / w - (at.x.norm() <= 1.0 ? dx : 0.0));
    }

    ExtReal total = ExtReal::finite(finitePart);
    for (const DensitySegment& seg : trip.nu.segments) {
        if (seg.dim() == 1) {
            const double a = base(0);
            const double dd = d(0);
            if (dd == 0.0) continue;
            const SupportRegion sup = seg.support();
            if (a != 0.0) {
                const double xs = -1.0 / a;  // ruin point of the base
                if (xs >= sup.lo - 1e-12 && xs <= sup.hi + 1e-12) {
                    const bool atLo = std::isfinite(sup.lo) &&
                        std::abs(xs - sup.lo) <= 1e-9 * (1.0 + std::abs(sup.lo));
                    const bool atHi = std::isfinite(sup.hi) &&
                        std::abs(xs - sup.hi) <= 1e-9 * (1.0 + std::abs(sup.hi));
                    if (!atLo && !atHi)
                        throw LevyError(
                            "directional rate undefined: jumps beyond the ruin "
                            "point " + std::to_string(xs) + " have positive mass");
                    // Ruin point sits at a support endpoint. A density with a
                    // positive limit there makes 1/(1 + base'x) non-integrable
                    // and the rate diverges with the sign of d'x at that
                    // point; a density vanishing at the endpoint cures the
                    // singularity. Decide by decay between two probe scales,
                    // which is insensitive to the density's overall size.
                    const double side = atLo ? 1.0 : -1.0;
                    const double dOut = std::abs(seg.density1(xs + side * 1e-7));
                    const double dIn = std::abs(seg.density1(xs + side * 5e-8));
                    if (dIn > 0.75 * dOut) {
                        if (dd * xs > 0.0) posInf = true;
                        else negInf = true;
                        continue;
                    }
                }
            }
            Integrand F;
            F.f = [base, d](const Vec& x) {
                const double w = 1.0 + base.dot(x);
                const double dx = d.dot(x);
                const double inner = x.norm() <= 1.0 ? dx : 0.0;
                return dx / std::max(w, 1e-300) - inner;
            };
            if (seg.unbounded()) {
                if (std::abs(a) > 1e-15) {
                    F.growth = Integrand::Growth::BoundedLimit;  // -> d/a
                } else {
                    F.growth = Integrand::Growth::Linear;  // d'x on the tail
                }
            }
            total = total + integrate_segment(seg, F, opt);
        } else {
            const ExtReal lo = seg.support().inf_dot(base);
            if (lo.is_neg_inf() || lo.value() < -1.0 - 1e-12)
                throw LevyError(
                    "directional rate undefined: a jump wipes out the base "
                    "portfolio");
            if (lo.value() <= -1.0 + 1e-9)
                throw UnsupportedVariant(
                    "directional rates at the ruin boundary are implemented "
                    "for one-asset jump densities");
            Integrand F;
            F.f = [base, d](const Vec& x) {
                const double dx = d.dot(x);
                return dx / (1.0 + base.dot(x)) - (x.norm() <= 1.0 ? dx : 0.0);
            };
            total = total + integrate_segment(seg, F, opt);
        }
    }

    if (posInf && negInf)
        throw LevyError("directional rate indeterminate: divergent pieces of "
                        "both signs");
    if (posInf) total = total + ExtReal::pos_inf();
    if (negInf) total = total + ExtReal::neg_inf();
    return total;
}

double halton(long index, int base) {
    double f = 1.0, r = 0.0;
    for (long n = index; n > 0; n /= base) {
        f /= base;
        r += f * (n % base);
    }
    return r;
}

}  // namespace

ExtReal growth_rate(const LevyTriplet& trip, const Vec& pi,
                    const quad::Options& opt) {
    if (pi.size() != trip.dim)
        throw InvariantViolation("portfolio dimension mismatch");
    // Positive mass beyond the ruin boundary makes the expected log -inf.
    for (const Atom& at : trip.nu.atoms)
        if (pi.dot(at.x) <= -1.0) return ExtReal::neg_inf();
    for (const DensitySegment& seg : trip.nu.segments) {
        const ExtReal lo = seg.support().inf_dot(pi);
        if (lo.is_neg_inf()) return ExtReal::neg_inf();
        if (lo.value() < -1.0 - 1e-14) return ExtReal::neg_inf();
    }

    double finitePart = pi.dot(trip.b) - 0.5 * pi.dot(trip.c * pi);
    for (const Atom& at : trip.nu.atoms) {
        const double s = pi.dot(at.x);
        finitePart +=
            at.rate * (std::log1p(s) - (at.x.norm() <= 1.0 ? s : 0.0));
    }

    ExtReal total = ExtReal::finite(finitePart);
    for (const DensitySegment& seg : trip.nu.segments) {
        Integrand F;
        F.f = [pi](const Vec& x) {
            const double w = 1.0 + pi.dot(x);
            const double inner = x.norm() <= 1.0 ? pi.dot(x) : 0.0;
            // w can touch 0 only at a support endpoint; clamp keeps the
            // integrable log singularity finite at stray evaluations.
            return std::log(std::max(w, 1e-300)) - inner;
        };
        F.growth = Integrand::Growth::Logarithmic;
        const double a = trip.dim == 1 ? pi(0) : 0.0;
        F.logCoeff = [a](int dir) { return a * dir > 0.0 ? 1.0 : 0.0; };
        total = total + integrate_segment(seg, F, opt);
    }
    return total;
}

ExtReal growth_rate_derivative(const LevyTriplet& trip, const Vec& pi,
                               const Vec& d, const quad::Options& opt) {
    return directional_rel(trip, pi, d, opt);
}

ExtReal rel_rate(const LevyTriplet& trip, const Vec& pi, const Vec& rho,
                 const quad::Options& opt) {
    return directional_rel(trip, rho, pi - rho, opt);
}

NumeraireResult solve_numeraire(const LevyTriplet& trip, const ConstraintSet& C,
                                const quad::Options& opt) {
    trip.validate();
    if (C.dim() != trip.dim)
        throw InvariantViolation("constraint dimension mismatch");

    // Growth is unbounded exactly when the recession cone of the constraints
    // admits an immediate-arbitrage direction (scaling a position along such
    // a direction raises growth without bound, and only recession directions
    // can be scaled inside C); refuse honestly in that case.
    bool recChecked = true;
    IaoSearch iao;
    try {
        iao = find_immediate_arbitrage(trip, C.recession_cone(), opt);
    } catch (const UnsupportedVariant&) {
        recChecked = false;
    }
    if (iao.found)
        throw IaoPresent("no growth-optimal portfolio: riskless direction " +
                         vec_str(iao.xi) + " makes growth unbounded");

    const Mat N = null_investments(trip);
    require_null_compatible(C, N);
    auto project = [&](const Vec& p) {
        Vec q = C.project(p);
        if (N.cols() > 0) q -= N * (N.transpose() * q);
        return q;
    };
    auto admissible = [&](const Vec& p) {
        return barrier_admissible(trip, p, kBarrier);
    };

    NumeraireResult out;
    long iters = 0;
    double finalStep = 0.0;

    auto run = [&](const LevyTriplet& t, const Vec& start) {
        auto value = [&](const Vec& p) {
            return growth_rate(t, p, opt).expect_finite(
                "growth rate during the search");
        };
        auto grad = [&](const Vec& p) {
            Vec g(t.dim);
            for (int i = 0; i < t.dim; ++i) {
                Vec e = Vec::Zero(t.dim);
                e(i) = 1.0;
                g(i) = directional_rel(t, p, e, opt).expect_finite(
                    "growth-rate gradient");
            }
            return g;
        };
        opt::Result r =
            opt::maximize(value, grad, project, admissible, start, {});
        iters += r.iterations;
        finalStep = r.finalStep;
        if (!r.converged)
            throw ConvergenceFailure(
                "growth maximization hit the iteration cap");
        return r;
    };

    Vec start = Vec::Zero(trip.dim);
    if (integrates_log(trip.nu)) {
        out.rho = run(trip, start).x;
    } else {
        // The log-wealth integral is not defined under nu itself; solve a
        // sequence of tail-lightened markets and track the limit.
        Vec prev;
        bool settled = false;
        for (int n = 1; n <= 1024; n *= 2) {
            LevyTriplet tn = trip;
            tn.nu = approximate(trip.nu, n);
            const opt::Result r = run(tn, start);
            out.approxTrace.push_back({n, r.x, r.value});
            if (prev.size() > 0 && (r.x - prev).norm() < 1e-7) {
                settled = true;
                out.rho = r.x;
                out.notes.push_back(
                    "tail-lightening scheme settled at n = " +
                    std::to_string(n));
                break;
            }
            prev = r.x;
            start = r.x;  // warm start the next stage
        }
        if (!settled) {
            // Fit rho_n ~ rho_inf - a ln(n)/n - b/n on the last trace points
            // and report the fitted limit, flagged as extrapolated.
            const int m = static_cast<int>(out.approxTrace.size());
            const int k = std::min(4, m);
            Mat A(k, 3);
            Mat Y(k, trip.dim);
            for (int i = 0; i < k; ++i) {
                const ApproxStep& st = out.approxTrace[m - k + i];
                const double n = static_cast<double>(st.n);
                A(i, 0) = 1.0;
                A(i, 1) = -std::log(n) / n;
                A(i, 2) = -1.0 / n;
                Y.row(i) = st.rho.transpose();
            }
            const Mat coef = A.colPivHouseholderQr().solve(Y);
            Vec fitted = project(coef.row(0).transpose());
            const Vec& last = out.approxTrace.back().rho;
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.3e",
                          (last - out.approxTrace[m - 2].rho).norm());
            if (admissible(fitted)) {
                out.rho = fitted;
                out.extrapolated = true;
                out.notes.push_back(
                    std::string("tail-lightening scheme hit n = 1024 with "
                                "stage gap ") + buf +
                    "; reported portfolio is the fitted limit");
            } else {
                out.rho = last;
                out.notes.push_back(
                    std::string("tail-lightening scheme hit n = 1024 with "
                                "stage gap ") + buf +
                    "; fitted limit was inadmissible, reporting the last "
                    "stage");
            }
        }
    }

    if (!recChecked)
        out.notes.push_back(
            "recession-cone arbitrage pre-check unavailable for this "
            "constraint shape; relied on the search itself");

    out.growthRate = growth_rate(trip, out.rho, opt);
    out.iterations = iters;
    out.finalStep = finalStep;
    out.kktResidual = verify_numeraire(trip, C, out.rho, opt, {});
    return out;
}

double verify_numeraire(const LevyTriplet& trip, const ConstraintSet& C,
                        const Vec& rho, const quad::Options& opt,
                        const VerifyOptions& vopt) {
    if (rho.size() != trip.dim)
        throw InvariantViolation("portfolio dimension mismatch");
    const int d = trip.dim;
    const Mat N = null_investments(trip);

    std::vector<Vec> raw = C.probe_points();
    raw.push_back(rho);

    // Probes just inside the ruin boundary of every jump direction.
    std::vector<Vec> jumpDirs;
    for (const Atom& at : trip.nu.atoms) jumpDirs.push_back(at.x);
    for (const DensitySegment& seg : trip.nu.segments)
        for (const Vec& v : seg.support().span_points()) jumpDirs.push_back(v);
    for (const Vec& v : jumpDirs) {
        const double n2 = v.squaredNorm();
        if (n2 > 1e-24) raw.push_back(-(1.0 - 1e-6) / n2 * v);
    }

    // Deterministic quasi-random coverage of a box around the probes.
    Vec lo = rho - Vec::Constant(d, 2.0);
    Vec hi = rho + Vec::Constant(d, 2.0);
    for (const Vec& p : raw)
        for (int i = 0; i < d; ++i) {
            if (!std::isfinite(p(i))) continue;
            lo(i) = std::min(lo(i), p(i) - 0.5);
            hi(i) = std::max(hi(i), p(i) + 0.5);
        }
    static const int primes[6] = {2, 3, 5, 7, 11, 13};
    if (d > 6)
        throw UnsupportedVariant(
            "quasi-random verification supports up to six assets");
    for (long idx = 1; idx <= vopt.quasiRandomPoints; ++idx) {
        Vec p(d);
        for (int i = 0; i < d; ++i)
            p(i) = lo(i) + halton(idx, primes[i]) * (hi(i) - lo(i));
        raw.push_back(p);
    }

    std::vector<Vec> samples;
    samples.reserve(raw.size());
    for (const Vec& p : raw) {
        Vec q = C.project(p);
        if (N.cols() > 0) q -= N * (N.transpose() * q);
        if (!C.contains(q, 1e-7)) continue;
        if (!natural_constraints_contains(trip.nu, q, 1e-9)) continue;
        samples.push_back(q);
    }
    if (samples.empty()) return kInfD;  // nothing certifiable

    auto eval = [&](const Vec& p) -> double {
        try {
            const ExtReal r = rel_rate(trip, p, rho, opt);
            if (r.is_pos_inf()) return kInfD;
            if (r.is_neg_inf()) return -kInfD;
            return r.value();
        } catch (...) {
            return kInfD;  // a sample the rate cannot even be formed for
        }
    };

    const long M = static_cast<long>(samples.size());
    double best = -kInfD;
    bool ranParallel = false;
#ifdef _OPENMP
    if (vopt.parallel) {
        ranParallel = true;
#pragma omp parallel for schedule(dynamic) reduction(max : best)
        for (long i = 0; i < M; ++i) best = std::max(best, eval(samples[i]));
    }
#endif
    if (!ranParallel)
        for (long i = 0; i < M; ++i) best = std::max(best, eval(samples[i]));
    return best;
}

namespace opt {

Result maximize(const std::function<double(const Vec&)>& value,
                const std::function<Vec(const Vec&)>& gradient,
                const std::function<Vec(const Vec&)>& project,
                const std::function<bool(const Vec&)>& admissible,
                const Vec& start, const Options& o) {
    Vec x = project(start);
    if (!admissible(x))
        throw InvariantViolation("optimizer start is not admissible");
    double fx = value(x);
    double step = o.initialStep;
    int stall = 0;
    long it = 0;
    bool converged = false;

    for (; it < o.maxIter; ++it) {
        const Vec g = gradient(x);
        if ((project(x + g) - x).norm() < o.gradTol) {
            converged = true;
            break;
        }
        double trial = step;
        bool accepted = false;
        Vec xNew;
        double fNew = 0.0;
        for (int h = 0; h < 200; ++h) {
            const Vec cand = project(x + trial * g);
            const Vec dx = cand - x;
            if (dx.norm() < o.stepFloor) break;  // stalled at this scale
            if (admissible(cand)) {
                const double fc = value(cand);
                if (fc >= fx + o.armijo * g.dot(dx)) {
                    accepted = true;
                    xNew = cand;
                    fNew = fc;
                    break;
                }
            }
            trial *= 0.5;
        }
        if (accepted) {
            stall = (xNew - x).norm() < o.stepFloor ? stall + 1 : 0;
            x = xNew;
            fx = fNew;
            step = trial * 2.0;
        } else {
            step = std::max(trial, o.stepFloor * 0.5);
            ++stall;
        }
        if (stall >= o.stallLimit) {
            converged = true;
            ++it;
            break;
        }
    }

    // Armijo comparisons lose resolution once objective improvements fall
    // below machine epsilon relative to the objective scale, which strands x
    // at a projected-gradient norm around sqrt(eps). Descend on the gradient
    // norm itself — no objective comparisons — to polish past that floor.
    bool polished = false;
    if (converged) {
        double s = std::max(step, o.stepFloor);
        Vec g = gradient(x);
        double gn = (project(x + g) - x).norm();
        for (int h = 0; h < o.polishIter && gn >= o.gradTol; ++h) {
            const Vec cand = project(x + s * g);
            if (!admissible(cand) || (cand - x).norm() == 0.0) {
                s *= 0.5;
                if (s < o.stepFloor) break;
                continue;
            }
            const Vec gc = gradient(cand);
            const double gcn = (project(cand + gc) - cand).norm();
            if (gcn < gn) {
                x = cand;
                g = gc;
                gn = gcn;
                s *= 1.1;
                polished = true;
            } else {
                s *= 0.5;
                if (s < o.stepFloor) break;
            }
            ++it;
        }
    }
    if (polished) fx = value(x);

    Result r;
    r.x = x;
    r.value = fx;
    r.iterations = it;
    r.finalStep = step;
    r.converged = converged;
    return r;
}

}  // namespace opt

}  // namespace levy
