#include "levy/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace levy::quad {

namespace {

// 15-point Kronrod nodes on [0,1] side (symmetric) with K15 weights; the
// odd-indexed nodes form the embedded 7-point Gauss rule.
constexpr double kNode[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kWeightK[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kWeightG[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

}  // namespace

double gk15_panel(const Fn& f, double a, double b, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);

    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kNode[i]);
        fv[14 - i] = f(c + h * kNode[i]);
    }
    fv[7] = f(c);
    for (double v : fv)
        if (!std::isfinite(v))
            throw QuadratureDivergence("non-finite integrand value inside panel");

    double k15 = kWeightK[7] * fv[7];
    for (int i = 0; i < 7; ++i) k15 += kWeightK[i] * (fv[i] + fv[14 - i]);

    double g7 = kWeightG[3] * fv[7];
    for (int i = 0; i < 3; ++i)
        g7 += kWeightG[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);

    k15 *= h;
    g7 *= h;

    const double d = std::abs(k15 - g7);
    err = d > 0 ? std::min(d, std::pow(200.0 * d, 1.5)) : 0.0;
    return k15;
}

namespace {

struct Panel {
    double a, b, value, err;
    int depth;
};

double run_adaptive(const Fn& f, std::vector<Panel> stack, const Options& opt) {
    long evals = static_cast<long>(stack.size()) * 15;
    double total = 0.0, totalErr = 0.0;
    std::vector<Panel> done;
    done.reserve(64);

    const double budget = opt.absTol;
    while (!stack.empty()) {
        Panel p = stack.back();
        stack.pop_back();
        const double localTol =
            std::max(budget * (0.25 * std::pow(0.5, p.depth)), 1e-300);
        if (p.err <= localTol || p.depth >= opt.maxDepth) {
            done.push_back(p);
            continue;
        }
        if (evals > opt.maxEvals)
            throw QuadratureDivergence("quadrature evaluation budget exhausted");
        const double m = 0.5 * (p.a + p.b);
        Panel l{p.a, m, 0, 0, p.depth + 1}, r{m, p.b, 0, 0, p.depth + 1};
        l.value = gk15_panel(f, l.a, l.b, l.err);
        r.value = gk15_panel(f, r.a, r.b, r.err);
        evals += 30;
        stack.push_back(l);
        stack.push_back(r);
    }
    for (const Panel& p : done) {
        total += p.value;
        totalErr += p.err;
    }
    if (totalErr > 50.0 * std::max(opt.absTol, opt.relTol * std::abs(total)))
        throw QuadratureDivergence("quadrature failed to converge: error " +
                                   std::to_string(totalErr));
    return total;
}

}  // namespace

double adaptive_finite(const Fn& f, double a, double b, const Options& opt) {
    if (!(a < b)) return 0.0;
    Panel p{a, b, 0, 0, 0};
    p.value = gk15_panel(f, a, b, p.err);
    return run_adaptive(f, {p}, opt);
}

double adaptive_with_breakpoints(const Fn& f, double a, double b,
                                 std::vector<double> breakpoints,
                                 const Options& opt) {
    if (!(a < b)) return 0.0;
    breakpoints.push_back(a);
    breakpoints.push_back(b);
    std::sort(breakpoints.begin(), breakpoints.end());
    std::vector<double> cuts;
    for (double t : breakpoints) {
        if (t < a || t > b) continue;
        if (!cuts.empty() && t - cuts.back() < 1e-14 * (1.0 + std::abs(t))) continue;
        cuts.push_back(t);
    }
    std::vector<Panel> stack;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        Panel p{cuts[i], cuts[i + 1], 0, 0, 0};
        p.value = gk15_panel(f, p.a, p.b, p.err);
        stack.push_back(p);
    }
    if (stack.empty()) return 0.0;
    return run_adaptive(f, std::move(stack), opt);
}

}  // namespace levy::quad
