// levy-nfl: analyze exponential Levy market models under convex investment
// constraints. Subcommands certify or refute no-free-lunch conditions,
// compute the growth-optimal portfolio, construct exponential-tilt
// supermartingale measures, check completeness, and run Monte Carlo
// verification of each claim.
//
// Exit codes (the behavioral contract):
//   0  analysis ran and found no free lunch of the decidable kind
//   2  a free lunch was found (arbitrage direction, drift violation,
//      demonstrated unbounded profit, or a violated supermartingale test)
//   1  input error or convergence failure

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "levy/arbitrage.hpp"
#include "levy/esscher.hpp"
#include "levy/market_io.hpp"
#include "levy/numeraire.hpp"
#include "levy/report.hpp"
#include "levy/simulate.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kFreeLunch = 2;

struct Flags {
    std::string specPath;
    std::uint64_t seed = 0;
    int paths = 0;
    std::string csv;
    double tol = 0.0;
    bool json = false;
    std::string what = "supermartingale";
    std::string out;  // esscher only: write the tilted market spec here

    CLI::Option* seedOpt = nullptr;
    CLI::Option* pathsOpt = nullptr;
    CLI::Option* tolOpt = nullptr;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("spec", f.specPath, "market spec JSON file")->required();
    f.seedOpt = sub->add_option("--seed", f.seed, "RNG seed override");
    f.pathsOpt = sub->add_option("--paths", f.paths, "Monte Carlo path count override");
    sub->add_option("--csv", f.csv, "dump simulated paths to this CSV file");
    f.tolOpt = sub->add_option("--tol", f.tol, "quadrature absolute tolerance override");
    sub->add_flag("--json", f.json, "machine-readable JSON output");
}

void apply_thread_cap() {
    const char* env = std::getenv("LEVY_NFL_THREADS");
    if (!env || !*env) return;
    char* end = nullptr;
    long n = std::strtol(env, &end, 10);
    if (end == env || n < 1) {
        std::cerr << "warning: ignoring LEVY_NFL_THREADS=\"" << env << "\"\n";
        return;
    }
#ifdef _OPENMP
    omp_set_num_threads(static_cast<int>(n));
#endif
}

struct Loaded {
    levy::MarketSpecFile spec;
    levy::quad::Options qopt;
    levy::SimOptions sopt;
};

Loaded load(const Flags& f) {
    Loaded l;
    l.spec = levy::load_market_spec(f.specPath);
    if (f.seedOpt->count() > 0) l.spec.options.seed = f.seed;
    if (f.pathsOpt->count() > 0) {
        if (f.paths < 1) throw levy::SchemaError("--paths must be positive");
        l.spec.options.paths = f.paths;
    }
    if (f.tolOpt->count() > 0) {
        if (!(f.tol > 0)) throw levy::SchemaError("--tol must be positive");
        l.qopt.absTol = f.tol;
        l.qopt.relTol = std::max(f.tol * 100.0, 1e-14);
    }
    l.sopt.epsilon = l.spec.options.epsilon;
    const char* env = std::getenv("LEVY_NFL_THREADS");
    if (env && std::string(env) == "1") l.sopt.parallel = false;
    return l;
}

double working_horizon(const levy::Horizon& h) { return h.finite ? h.T : 1.0; }

std::string json_escape(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') (out += '\\') += ch;
        else if (ch == '\n') out += "\\n";
        else out += ch;
    }
    return out + "\"";
}

void maybe_csv(const Flags& f, const levy::PathBundle& bundle) {
    if (f.csv.empty()) return;
    levy::write_paths_csv(f.csv, bundle);
    std::cerr << "wrote " << std::min<std::size_t>(bundle.paths.size(), 64)
              << " path(s) to " << f.csv << "\n";
}

int cmd_analyze(const Flags& f) {
    Loaded l = load(f);
    levy::NflReport rep =
        levy::nfl_report(l.spec.market, l.spec.constraints, l.spec.horizon, l.qopt);
    std::cout << (f.json ? levy::to_json(rep) : levy::to_text(rep));
    for (const auto& [key, s] : rep.statuses)
        if (s == levy::Status::Fails) return kFreeLunch;
    return kOk;
}

int cmd_numeraire(const Flags& f) {
    Loaded l = load(f);
    try {
        levy::NumeraireResult res =
            levy::solve_numeraire(l.spec.market, l.spec.constraints, l.qopt);
        std::cout << (f.json ? levy::to_json(res) : levy::to_text(res));
        return kOk;
    } catch (const levy::IaoPresent& e) {
        std::cout << (f.json
                          ? "{\n  \"freeLunch\": true,\n  \"reason\": " +
                                json_escape(e.what()) + "\n}\n"
                          : std::string("no growth-optimal portfolio: ") + e.what() + "\n");
        return kFreeLunch;
    }
}

int cmd_esscher(const Flags& f) {
    Loaded l = load(f);
    const double T = working_horizon(l.spec.horizon);
    levy::EsmmResult res = levy::find_esmm(
        l.spec.market, l.spec.constraints.closed_conic_hull(), T, l.qopt);
    std::cout << (f.json ? levy::to_json(res) : levy::to_text(res));
    if (res.found && !f.out.empty()) {
        levy::TransformedTriplet tt =
            levy::transform_triplet(l.spec.market, res.params, l.qopt);
        std::ofstream os(f.out);
        if (!os) throw levy::SchemaError("cannot open output file: " + f.out);
        os << levy::serialize_market_spec(levy::with_transform(l.spec, tt));
        std::cerr << "wrote tilted market spec to " << f.out << "\n";
    }
    return res.found ? kOk : kFreeLunch;
}

int cmd_complete(const Flags& f) {
    Loaded l = load(f);
    levy::CompletenessVerdict v =
        levy::check_completeness(l.spec.market, l.spec.constraints, l.qopt);
    std::cout << (f.json ? levy::to_json(v) : levy::to_text(v));
    return v.reason == "arbitrageCondition" ? kFreeLunch : kOk;
}

int cmd_simulate(const Flags& f) {
    Loaded l = load(f);
    const levy::LevyTriplet& mkt = l.spec.market;
    const levy::ConstraintSet& C = l.spec.constraints;
    const double T = working_horizon(l.spec.horizon);
    const std::uint64_t seed = l.spec.options.seed;
    const int paths = l.spec.options.paths;

    if (f.what == "supermartingale") {
        levy::NumeraireResult num;
        try {
            num = levy::solve_numeraire(mkt, C, l.qopt);
        } catch (const levy::IaoPresent& e) {
            std::cout << "no growth-optimal portfolio: " << e.what() << "\n";
            return kFreeLunch;
        }
        levy::PathBundle bundle =
            levy::sample_paths(mkt, T, 32, paths, seed, l.sopt, l.qopt);
        auto denom = levy::wealth_path(mkt, bundle, num.rho);
        auto numer = levy::wealth_path(mkt, bundle, levy::Vec::Zero(mkt.dim));
        levy::SimulationReport rep = levy::supermartingale_test(bundle, numer, denom);
        maybe_csv(f, bundle);
        std::cout << (f.json ? levy::to_json(rep) : levy::to_text(rep));
        return rep.consistent ? kOk : kFreeLunch;
    }

    if (f.what == "iao-demo") {
        levy::IaoSearch s =
            levy::find_immediate_arbitrage(mkt, C.recession_cone(), l.qopt);
        if (!s.found) {
            std::cout << (f.json ? "{\n  \"immediateArbitrage\": false\n}\n"
                                 : "no immediate-arbitrage direction\n");
            return kOk;
        }
        levy::SimulationReport rep =
            levy::increasing_profit_demo(mkt, s.xi, T, paths, seed, l.sopt, l.qopt);
        if (!f.csv.empty())
            maybe_csv(f, levy::sample_paths(mkt, T, 64, std::min(paths, 64), seed,
                                            l.sopt, l.qopt));
        std::cout << (f.json ? levy::to_json(rep) : levy::to_text(rep));
        return kFreeLunch;  // demonstrated free lunch
    }

    if (f.what == "infinite-horizon") {
        const int n = f.pathsOpt->count() > 0 ? paths : 2000;
        try {
            levy::SimulationReport rep = levy::infinite_horizon_free_lunch_demo(
                mkt, C, l.spec.options.level, seed, n, l.sopt, l.qopt);
            if (!f.csv.empty())
                maybe_csv(f, levy::sample_paths(mkt, T, 64, std::min(n, 64), seed,
                                                l.sopt, l.qopt));
            std::cout << (f.json ? levy::to_json(rep) : levy::to_text(rep));
            return kFreeLunch;  // demonstrated free lunch with vanishing risk
        } catch (const levy::InvariantViolation& e) {
            std::cout << "no infinite-horizon free lunch: " << e.what() << "\n";
            return kOk;
        }
    }

    if (f.what == "esscher-martingale") {
        levy::EsmmResult es =
            levy::find_esmm(mkt, C.closed_conic_hull(), T, l.qopt);
        if (!es.found) {
            std::cout << (f.json ? levy::to_json(es) : levy::to_text(es));
            return kFreeLunch;
        }
        levy::SimulationReport rep = levy::esscher_martingale_check(
            mkt, es.params, T, paths, seed, l.sopt, l.qopt);
        if (!f.csv.empty())
            maybe_csv(f, levy::sample_paths(mkt, T, 32, std::min(paths, 64), seed,
                                            l.sopt, l.qopt));
        std::cout << (f.json ? levy::to_json(rep) : levy::to_text(rep));
        return rep.consistent ? kOk : kFreeLunch;
    }

    throw levy::SchemaError("unknown --what \"" + f.what +
                            "\"; expected supermartingale, iao-demo, "
                            "infinite-horizon, or esscher-martingale");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "analyze exponential Levy market models: no-free-lunch certification, "
        "growth-optimal portfolios, measure transforms, completeness, and "
        "Monte Carlo verification"};
    app.require_subcommand(1);

    Flags fa, fn, fe, fc, fs;
    CLI::App* analyze =
        app.add_subcommand("analyze", "certify or refute the no-free-lunch conditions");
    add_common(analyze, fa);
    CLI::App* numeraire =
        app.add_subcommand("numeraire", "compute the growth-optimal portfolio");
    add_common(numeraire, fn);
    CLI::App* esscher = app.add_subcommand(
        "esscher", "construct an equivalent supermartingale measure by exponential tilt");
    add_common(esscher, fe);
    esscher->add_option("--out", fe.out, "write the tilted market as a new spec file");
    CLI::App* complete =
        app.add_subcommand("complete", "check market completeness");
    add_common(complete, fc);
    CLI::App* simulate =
        app.add_subcommand("simulate", "Monte Carlo verification runs");
    add_common(simulate, fs);
    simulate
        ->add_option("--what", fs.what,
                     "supermartingale | iao-demo | infinite-horizon | esscher-martingale")
        ->default_str("supermartingale");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kError;
    }

    apply_thread_cap();

    try {
        if (analyze->parsed()) return cmd_analyze(fa);
        if (numeraire->parsed()) return cmd_numeraire(fn);
        if (esscher->parsed()) return cmd_esscher(fe);
        if (complete->parsed()) return cmd_complete(fc);
        if (simulate->parsed()) return cmd_simulate(fs);
        std::cerr << "error: no subcommand\n";
        return kError;
    } catch (const levy::SchemaError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kError;
    } catch (const levy::HorizonCapReached& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return kError;
    } catch (const levy::LevyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }
}
