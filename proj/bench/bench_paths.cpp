// Benchmark: the OpenMP path-sampling and numeraire-verification kernels
// against their serial reference loops. The two must produce bit-identical
// results (one counter-based RNG stream per path, reductions in path order);
// this binary asserts that and reports the timings.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "levy/constraints.hpp"
#include "levy/numeraire.hpp"
#include "levy/simulate.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace levy;

namespace {

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// Two assets: correlated diffusion, two jump atoms, and a bounded density
// segment on the first asset — every sampler kind exercised.
LevyTriplet bench_market() {
    LevyTriplet trip;
    trip.dim = 2;
    trip.b = Vec(2);
    trip.b << 0.12, 0.05;
    trip.c = Mat(2, 2);
    trip.c << 0.04, 0.01, 0.01, 0.09;

    trip.nu.dim = 2;
    Vec a1(2), a2(2);
    a1 << 0.2, -0.1;
    a2 << -0.25, 0.15;
    trip.nu.atoms.push_back(Atom{a1, 0.7});
    trip.nu.atoms.push_back(Atom{a2, 0.4});

    DensitySegment seg;  // product density on the box [-0.5,0.5] x [-0.3,0.3]
    seg.factors.push_back(Family1D::polynomial({1.0, 0.5}, -0.5, 0.5));
    seg.factors.push_back(Family1D::polynomial({1.0}, -0.3, 0.3));
    trip.nu.segments.push_back(seg);
    trip.validate();
    return trip;
}

bool same_bundle(const PathBundle& x, const PathBundle& y) {
    if (x.paths.size() != y.paths.size()) return false;
    for (std::size_t i = 0; i < x.paths.size(); ++i) {
        const SimPath& p = x.paths[i];
        const SimPath& q = y.paths[i];
        if (p.times != q.times) return false;           // exact
        if (p.incs != q.incs) return false;             // exact
        if (p.jumps.size() != q.jumps.size()) return false;
        for (std::size_t j = 0; j < p.jumps.size(); ++j) {
            if (p.jumps[j].gridIndex != q.jumps[j].gridIndex) return false;
            if (p.jumps[j].time != q.jumps[j].time) return false;
            if (p.jumps[j].x != q.jumps[j].x) return false;
        }
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    int nPaths = argc > 1 ? std::atoi(argv[1]) : 20000;
    if (nPaths < 1) nPaths = 20000;

#ifdef _OPENMP
    std::printf("openmp: enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("openmp: disabled at configure time (serial build)\n");
#endif

    LevyTriplet trip = bench_market();
    const double T = 1.0;
    const int nSteps = 64;
    const std::uint64_t seed = 20240901;

    SimOptions serial;
    serial.parallel = false;
    SimOptions parallel;
    parallel.parallel = true;

    // Warm-up (page in code and quadrature caches before timing).
    sample_paths(trip, T, nSteps, 256, seed, serial);

    double t0 = now_s();
    PathBundle bs = sample_paths(trip, T, nSteps, nPaths, seed, serial);
    double t1 = now_s();
    PathBundle bp = sample_paths(trip, T, nSteps, nPaths, seed, parallel);
    double t2 = now_s();

    std::printf("sample_paths  %d paths x %d steps\n", nPaths, nSteps);
    std::printf("  serial reference : %8.3f s\n", t1 - t0);
    std::printf("  parallel kernel  : %8.3f s  (speedup %.2fx)\n", t2 - t1,
                (t1 - t0) / std::max(t2 - t1, 1e-9));

    if (!same_bundle(bs, bp)) {
        std::printf("MISMATCH: parallel bundle differs from serial reference\n");
        return 1;
    }
    std::printf("  bit-identical    : yes\n");

    ConstraintSet C = ConstraintSet::full_space(2);
    NumeraireResult num = solve_numeraire(trip, C);

    VerifyOptions vs;
    vs.parallel = false;
    VerifyOptions vp;
    vp.parallel = true;

    double t3 = now_s();
    double worstSerial = verify_numeraire(trip, C, num.rho, {}, vs);
    double t4 = now_s();
    double worstParallel = verify_numeraire(trip, C, num.rho, {}, vp);
    double t5 = now_s();

    std::printf("verify_numeraire sweep (%d sample portfolios)\n",
                vs.quasiRandomPoints);
    std::printf("  serial reference : %8.3f s   worst rel-rate % .3e\n",
                t4 - t3, worstSerial);
    std::printf("  parallel kernel  : %8.3f s   worst rel-rate % .3e  (speedup %.2fx)\n",
                t5 - t4, worstParallel, (t4 - t3) / std::max(t5 - t4, 1e-9));

    if (worstSerial != worstParallel) {
        std::printf("MISMATCH: parallel sweep result differs from serial reference\n");
        return 1;
    }
    std::printf("  bit-identical    : yes\n");
    return 0;
}
