#include "levy/arbitrage.hpp"

#include <algorithm>
#include <cmath>

#include "levy/esscher.hpp"
#include "levy/lp.hpp"

namespace levy {

namespace {

// Rows v such that {xi : v'xi >= 0 for all v} equals
// {xi : xi'x >= 0 nu-a.e.}: atoms, interval/box vertices, and recession
// directions of unbounded interval supports.
std::vector<Vec> support_nonneg_rows(const JumpMeasure& nu) {
    std::vector<Vec> rows;
    auto push = [&rows](Vec v) {
        if (v.norm() > 1e-14) rows.push_back(std::move(v));
    };
    for (const Atom& a : nu.atoms) push(a.x);
    for (const DensitySegment& seg : nu.segments) {
        const SupportRegion s = seg.support();
        if (s.kind == SupportRegion::Kind::Interval) {
            Vec v(1);
            for (double end : {s.lo, s.hi}) {
                if (std::isinf(end)) {
                    v << (end > 0 ? 1.0 : -1.0);
                    push(v);
                } else if (end != 0.0) {
                    v << end;
                    push(v);
                }
            }
        } else {  // bounded boxes only (segment validation enforces this)
            const int d = s.lower.size() > 0 ? static_cast<int>(s.lower.size())
                                             : seg.dim();
            if (d > 16) throw UnsupportedVariant("box support dimension too large");
            for (int mask = 0; mask < (1 << d); ++mask) {
                Vec v(d);
                for (int i = 0; i < d; ++i)
                    v(i) = (mask & (1 << i)) ? s.upper(i) : s.lower(i);
                push(v);
            }
        }
    }
    return rows;
}

struct SearchContext {
    Mat P;                        // projector onto the null-perp space
    Vec driftRow;                 // b - int x 1_{|x|<=1} nu
    std::vector<Vec> suppRows;    // xi'v >= 0 requirements
};

SearchContext make_context(const LevyTriplet& trip, const quad::Options& opt) {
    SearchContext ctx;
    const Mat N = null_investments(trip);
    ctx.P = Mat::Identity(trip.dim, trip.dim) - N * N.transpose();
    ctx.driftRow = trip.b - truncated_jump_mean(trip.nu, opt);
    ctx.suppRows = support_nonneg_rows(trip.nu);
    return ctx;
}

IaoSearch lp_search(const LevyTriplet& trip, const SearchContext& ctx,
                    const std::vector<Vec>& rays) {
    IaoSearch out;
    out.method = "exact-lp";
    const int d = trip.dim;
    const int k = static_cast<int>(rays.size());
    if (k == 0) {
        out.note = "cone has no nonzero directions";
        return out;
    }
    Mat R(d, k);
    for (int j = 0; j < k; ++j) R.col(j) = rays[j];

    const Mat PR = ctx.P * R;
    const int nSupp = static_cast<int>(ctx.suppRows.size());
    // Inequalities: lambda >= 0, support rows, drift row, target row.
    Mat A(k + nSupp + 1 + 1, k);
    Vec b = Vec::Zero(A.rows());
    A.topRows(k) = -Mat::Identity(k, k);
    for (int i = 0; i < nSupp; ++i)
        A.row(k + i) = -(ctx.suppRows[i].transpose() * R);
    A.row(k + nSupp) = -(ctx.driftRow.transpose() * R);
    // Equalities: c R lambda = 0 (PSD c, so this encodes xi'c xi = 0).
    const Mat Aeq = trip.c * R;
    const Vec beq = Vec::Zero(d);

    for (int j = 0; j < d; ++j) {
        for (double s : {1.0, -1.0}) {
            A.row(k + nSupp + 1) = -s * PR.row(j);
            b(k + nSupp + 1) = -1.0;
            const lp::Result r =
                lp::solve(Vec::Zero(k), A, b, Aeq, beq, 1e-9);
            if (r.status == lp::Result::Status::Optimal ||
                r.status == lp::Result::Status::Unbounded) {
                Vec lam;
                if (r.status == lp::Result::Status::Optimal) {
                    lam = r.x;
                } else {
                    continue;  // zero objective cannot be unbounded
                }
                Vec xi = R * lam;
                const double norm1 = (ctx.P * xi).cwiseAbs().sum();
                if (norm1 < 1e-12) continue;
                out.found = true;
                out.xi = xi / norm1;
                return out;
            }
        }
    }
    out.note = "no direction outside the null space satisfies the clauses";
    return out;
}

bool lex_less(const Vec& a, const Vec& b) {
    for (int i = 0; i < a.size(); ++i) {
        if (a(i) < b(i) - 1e-12) return true;
        if (a(i) > b(i) + 1e-12) return false;
    }
    return false;
}

std::vector<Vec> sphere_directions(int d) {
    std::vector<Vec> dirs;
    if (d == 1) {
        Vec v(1);
        v << 1.0;
        dirs.push_back(v);
        v << -1.0;
        dirs.push_back(v);
    } else if (d == 2) {
        const int n = 720;
        for (int i = 0; i < n; ++i) {
            const double th = 2.0 * M_PI * i / n;
            Vec v(2);
            v << std::cos(th), std::sin(th);
            dirs.push_back(v);
        }
    } else if (d == 3) {
        const int n = 2000;  // Fibonacci sphere
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < n; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / n;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double th = golden * i;
            Vec v(3);
            v << r * std::cos(th), r * std::sin(th), z;
            dirs.push_back(v);
        }
    } else {
        throw UnsupportedVariant(
            "direction-grid arbitrage search is provided up to dimension 3");
    }
    return dirs;
}

IaoSearch grid_search(const LevyTriplet& trip, const SearchContext& ctx,
                      const ConstraintSet& cone) {
    IaoSearch out;
    out.method = "direction-grid";
    const std::vector<Vec> dirs = sphere_directions(trip.dim);
    bool have = false;
    Vec best;
    for (const Vec& dRaw : dirs) {
        if (!cone.contains(dRaw, 1e-9)) continue;
        if ((trip.c * dRaw).cwiseAbs().maxCoeff() > 1e-10) continue;
        bool ok = true;
        for (const Vec& v : ctx.suppRows)
            if (v.dot(dRaw) < -1e-12) {
                ok = false;
                break;
            }
        if (!ok) continue;
        if (ctx.driftRow.dot(dRaw) < -1e-10) continue;
        const double norm1 = (ctx.P * dRaw).cwiseAbs().sum();
        if (norm1 < 1e-8) continue;
        const Vec cand = dRaw / norm1;
        if (!have || lex_less(cand, best)) {
            best = cand;
            have = true;
        }
    }
    if (have) {
        out.found = true;
        out.xi = best;
        out.note = "found on a direction grid of " +
                   std::to_string(dirs.size()) + " unit vectors";
    } else {
        out.note = "no candidate among " + std::to_string(dirs.size()) +
                   " grid directions; emptiness holds up to grid resolution";
    }
    return out;
}

}  // namespace

IaoSearch find_immediate_arbitrage(const LevyTriplet& trip,
                                   const ConstraintSet& cone,
                                   const quad::Options& opt, IaoMethod method) {
    if (cone.dim() != trip.dim)
        throw SchemaError("constraint cone dimension disagrees with the market");
    if (!cone.is_cone())
        throw InvariantViolation(
            "immediate-arbitrage search expects a cone (pass the recession cone)");
    const SearchContext ctx = make_context(trip, opt);
    if (method == IaoMethod::ExactLp)
        return lp_search(trip, ctx, cone.cone_generators());
    if (method == IaoMethod::DirectionGrid) return grid_search(trip, ctx, cone);
    try {
        return lp_search(trip, ctx, cone.cone_generators());
    } catch (const UnsupportedVariant&) {
        return grid_search(trip, ctx, cone);
    }
}

IncreasingProfit increasing_profit_decomposition(const LevyTriplet& trip,
                                                 const Vec& xi,
                                                 const quad::Options& opt) {
    if (xi.size() != trip.dim)
        throw SchemaError("direction dimension disagrees with the market");
    IncreasingProfit out;
    out.xi = xi;
    out.gaussianExposure = xi.dot(trip.c * xi);
    if (out.gaussianExposure > 1e-10 * (1.0 + xi.squaredNorm()))
        throw NotImmediateArbitrage("direction has Gaussian exposure");

    ExtReal worst = ExtReal::pos_inf();
    bool anySupport = false;
    for (const Atom& a : trip.nu.atoms) {
        const double v = xi.dot(a.x);
        anySupport = true;
        if (worst.is_pos_inf() || v < worst.value())
            worst = ExtReal::finite(v);
    }
    for (const DensitySegment& seg : trip.nu.segments) {
        anySupport = true;
        const ExtReal lo = seg.support().inf_dot(xi);
        if (lo.is_neg_inf()) throw NotImmediateArbitrage("negative jumps possible");
        if (worst.is_pos_inf() || lo.value() < worst.value()) worst = lo;
    }
    out.worstJump = anySupport ? (worst.is_pos_inf() ? 0.0 : worst.value()) : 0.0;
    if (out.worstJump < -1e-12)
        throw NotImmediateArbitrage("negative jumps possible");

    out.compensatedDrift = xi.dot(trip.b - truncated_jump_mean(trip.nu, opt));
    if (out.compensatedDrift < -1e-10)
        throw NotImmediateArbitrage("compensated drift is negative");

    double rate = 0.0;
    for (const Atom& a : trip.nu.atoms)
        if (xi.dot(a.x) > 1e-12) rate += a.rate;
    Integrand pos;
    pos.growth = Integrand::Growth::BoundedLimit;
    pos.f = [&xi](const Vec& x) { return xi.dot(x) > 1e-12 ? 1.0 : 0.0; };
    for (const DensitySegment& seg : trip.nu.segments)
        rate += integrate_segment(seg, pos, opt)
                    .expect_finite("positive-jump rate diverged");
    out.positiveJumpRate = rate;

    if (out.positiveJumpRate <= 1e-12 && out.compensatedDrift <= 1e-12)
        throw NotImmediateArbitrage(
            "direction never strictly gains: zero drift and no positive jumps");
    return out;
}

const char* to_string(Status s) {
    switch (s) {
        case Status::Holds: return "holds";
        case Status::Fails: return "fails";
        case Status::NotDecidedHere: return "notDecidedHere";
    }
    return "?";
}

ExtReal drift_functional(const LevyTriplet& trip, const Vec& p,
                         const quad::Options& opt) {
    double finitePart = p.dot(trip.b);
    bool posDiv = false, negDiv = false;

    for (const Atom& a : trip.nu.atoms)
        if (a.x.norm() > 1.0) finitePart += a.rate * p.dot(a.x);

    Integrand f;
    f.growth = Integrand::Growth::Linear;
    f.f = [&p](const Vec& x) { return x.norm() > 1.0 ? p.dot(x) : 0.0; };

    for (const DensitySegment& seg : trip.nu.segments) {
        if (seg.unbounded() && p(0) != 0.0 &&
            seg.tail_law().moment(1.0) != TailLaw::Verdict::Converges) {
            const double sign = p(0) * seg.tail_dir();
            (sign > 0 ? posDiv : negDiv) = true;
            continue;
        }
        const ExtReal part = integrate_segment(seg, f, opt);
        if (part.is_pos_inf())
            posDiv = true;
        else if (part.is_neg_inf())
            negDiv = true;
        else
            finitePart += part.value();
    }
    if (posDiv) return ExtReal::pos_inf();  // positive part not integrable
    if (negDiv) return ExtReal::neg_inf();
    return ExtReal::finite(finitePart);
}

NflReport nfl_report(const LevyTriplet& trip, const ConstraintSet& C,
                     const Horizon& horizon, const quad::Options& opt) {
    trip.validate();
    if (C.dim() != trip.dim)
        throw SchemaError("constraint set dimension disagrees with the market");

    static const std::vector<std::string> kKeys = {
        "NUIP",        "NUPBR",           "NA",         "NFLVR",
        "ESMM-exists", "numeraire-exists", "ESMD-exists"};

    NflReport rep;
    rep.horizon = horizon;
    const bool coneCase = C.is_cone();
    const ConstraintSet searchCone = coneCase ? C : C.recession_cone();
    rep.iao = find_immediate_arbitrage(trip, searchCone, opt);

    auto setAll = [&rep](Status s) {
        for (const std::string& k : kKeys) rep.statuses[k] = s;
    };

    if (horizon.finite) {
        if (coneCase) {
            setAll(rep.iao.found ? Status::Fails : Status::Holds);
            rep.notes.push_back(
                "cone constraints: the seven conditions stand or fall together");
        } else if (rep.iao.found) {
            setAll(Status::Fails);
            rep.notes.push_back(
                "arbitrage in the recession cone defeats every condition");
        } else {
            rep.statuses["NUIP"] = Status::Holds;
            rep.statuses["NUPBR"] = Status::Holds;
            rep.statuses["numeraire-exists"] = Status::Holds;
            rep.statuses["ESMD-exists"] = Status::Holds;
            rep.statuses["NA"] = Status::NotDecidedHere;
            rep.statuses["NFLVR"] = Status::NotDecidedHere;
            rep.notes.push_back(
                "non-cone constraints decide only the unbounded-profit family; "
                "NA and NFLVR need arguments outside this decision procedure");
            try {
                const ConstraintSet hull = C.closed_conic_hull();
                rep.hullIao = find_immediate_arbitrage(trip, hull, opt);
                rep.hullSearched = true;
                if (rep.hullIao.found) {
                    rep.statuses["ESMM-exists"] = Status::Fails;
                    rep.notes.push_back(
                        "arbitrage over the closed conic hull rules out an "
                        "equivalent supermartingale measure");
                } else {
                    rep.statuses["ESMM-exists"] = Status::NotDecidedHere;
                }
            } catch (const UnsupportedVariant& e) {
                rep.statuses["ESMM-exists"] = Status::NotDecidedHere;
                rep.notes.push_back(std::string("conic hull unavailable: ") +
                                    e.what());
            }
        }
        return rep;
    }

    // Infinite horizon: the supermartingale drift condition decides the
    // equivalence class {NA, NFLVR, NUPBR, ESMM, ESMD}; the immediate
    // arbitrage certificate decides NUIP and numeraire existence.
    const SupermartingaleVerdict sm = is_supermartingale_measure(trip, C, opt);
    rep.driftChecked = true;
    rep.driftHolds = sm.holds;
    rep.driftWorstDirection = sm.worstDirection;
    rep.driftWorstValue = sm.worstValue;
    const Status six = sm.holds ? Status::Holds : Status::Fails;
    rep.statuses["NA"] = six;
    rep.statuses["NFLVR"] = six;
    rep.statuses["NUPBR"] = six;
    rep.statuses["ESMM-exists"] = six;
    rep.statuses["ESMD-exists"] = six;
    rep.statuses["NUIP"] = rep.iao.found ? Status::Fails : Status::Holds;
    rep.statuses["numeraire-exists"] =
        rep.iao.found ? Status::Fails : Status::Holds;
    rep.notes.push_back(
        sm.holds ? "drift condition verified on every checked direction"
                 : "drift condition violated; unbounded profits accrue over an "
                   "infinite horizon");
    return rep;
}

}  // namespace levy
