#include "levy/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace levy {
namespace {

using json = nlohmann::json;

json jvec(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json jext(const ExtReal& x) {
    if (x.is_finite()) return json(x.value());
    return json(x.is_pos_inf() ? "+inf" : "-inf");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string fmt_vec(const Vec& v) {
    std::string out = "(";
    for (int i = 0; i < v.size(); ++i) {
        out += fmt(v(i));
        if (i + 1 < v.size()) out += ", ";
    }
    return out + ")";
}

json jiao(const IaoSearch& s) {
    json j;
    j["found"] = s.found;
    if (s.found) j["direction"] = jvec(s.xi);
    j["method"] = s.method;
    if (!s.note.empty()) j["note"] = s.note;
    return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

std::string to_json(const NflReport& r) {
    json j;
    j["horizon"] = r.horizon.finite ? json{{"finite", r.horizon.T}}
                                    : json("infinite");
    json st;
    for (const auto& [key, s] : r.statuses) st[key] = to_string(s);
    j["conditions"] = st;
    j["arbitrageSearch"] = jiao(r.iao);
    if (r.hullSearched) j["coneHullSearch"] = jiao(r.hullIao);
    if (r.driftChecked) {
        json d;
        d["holds"] = r.driftHolds;
        d["worstDirection"] = jvec(r.driftWorstDirection);
        d["worstValue"] = r.driftWorstValue;
        j["driftCondition"] = d;
    }
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j.dump(2) + "\n";
}

std::string to_json(const NumeraireResult& r) {
    json j;
    j["portfolio"] = jvec(r.rho);
    j["growthRate"] = jext(r.growthRate);
    j["kktResidual"] = r.kktResidual;
    j["iterations"] = r.iterations;
    j["finalStep"] = r.finalStep;
    if (!r.approxTrace.empty()) {
        json tr = json::array();
        for (const ApproxStep& s : r.approxTrace)
            tr.push_back({{"n", s.n},
                          {"portfolio", jvec(s.rho)},
                          {"growthRate", s.growth}});
        j["lighteningTrace"] = tr;
        j["extrapolated"] = r.extrapolated;
    }
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j.dump(2) + "\n";
}

std::string to_json(const EsmmResult& r) {
    json j;
    j["found"] = r.found;
    if (r.found) {
        json p;
        p["eta"] = jvec(r.params.eta);
        p["g"] = r.params.g == GTag::Zero ? "zero" : "quadraticTail";
        p["psi"] = r.params.psi;
        j["tilt"] = p;
        j["martingaleGrade"] = r.meanRateZero;
        j["transformedMeanRate"] = jvec(r.transformedMeanRate);
        j["classification"] = r.meanRateZero
                                  ? "equivalent martingale measure"
                                  : "equivalent supermartingale measure, not "
                                    "a martingale measure";
    } else {
        j["blockingDirection"] = jiao(r.witness);
    }
    if (!r.note.empty()) j["note"] = r.note;
    return j.dump(2) + "\n";
}

std::string to_json(const CompletenessVerdict& r) {
    json j;
    j["complete"] = r.complete;
    if (!r.complete) j["reason"] = r.reason;
    j["kernelDim"] = r.kernelDim;
    return j.dump(2) + "\n";
}

std::string to_json(const SimulationReport& r) {
    json j;
    j["statistic"] = r.statistic;
    j["estimate"] = r.estimate;
    j["stdError"] = r.stdError;
    j["verdict"] = r.consistent ? "consistent" : "violated";
    j["sampleSize"] = r.sampleSize;
    j["seed"] = r.seed;
    j["rngFamily"] = r.rngFamily;
    if (!r.details.empty()) j["details"] = r.details;
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j.dump(2) + "\n";
}

std::string to_json(const LogOptimalityReport& r) {
    json j;
    j["allOrdered"] = r.allOrdered;
    j["allNonPositive"] = r.allNonPositive;
    json es = json::array();
    for (const LogOptimalityEntry& e : r.entries)
        es.push_back({{"portfolio", jvec(e.pi)},
                      {"analyticLogExpectation", e.analyticLogExpectation},
                      {"mcLogMean", e.mcLogMean},
                      {"mcLogStdErr", e.mcLogStdErr},
                      {"jensenOrdered", e.jensenOrdered},
                      {"nonPositive", e.nonPositive}});
    j["entries"] = es;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Text
// ---------------------------------------------------------------------------

std::string to_text(const NflReport& r) {
    std::ostringstream os;
    os << "no-free-lunch report ("
       << (r.horizon.finite ? "horizon T = " + fmt(r.horizon.T)
                            : std::string("infinite horizon"))
       << ")\n";
    for (const auto& [key, s] : r.statuses)
        os << "  " << key << ": " << to_string(s) << "\n";
    if (r.iao.found)
        os << "  arbitrage direction: " << fmt_vec(r.iao.xi) << " ["
           << r.iao.method << "]\n";
    else
        os << "  no immediate-arbitrage direction [" << r.iao.method << "]\n";
    if (r.driftChecked) {
        os << "  drift condition: " << (r.driftHolds ? "holds" : "fails");
        if (!r.driftHolds)
            os << " in direction " << fmt_vec(r.driftWorstDirection)
               << " (value " << r.driftWorstValue << ")";
        os << "\n";
    }
    for (const std::string& n : r.notes) os << "  note: " << n << "\n";
    return os.str();
}

std::string to_text(const NumeraireResult& r) {
    std::ostringstream os;
    os << "growth-optimal portfolio: " << fmt_vec(r.rho) << "\n";
    os << "  growth rate: " << r.growthRate.str() << "\n";
    os << "  first-order residual: " << fmt(r.kktResidual) << "\n";
    os << "  iterations: " << r.iterations << "\n";
    if (!r.approxTrace.empty()) {
        os << "  tail-lightening trace:\n";
        for (const ApproxStep& s : r.approxTrace)
            os << "    n = " << s.n << ": " << fmt_vec(s.rho)
               << "  growth " << fmt(s.growth) << "\n";
        if (r.extrapolated) os << "  (reported portfolio is the fitted limit)\n";
    }
    for (const std::string& n : r.notes) os << "  note: " << n << "\n";
    return os.str();
}

std::string to_text(const EsmmResult& r) {
    std::ostringstream os;
    if (r.found) {
        os << "equivalent supermartingale measure found\n";
        os << "  tilt eta: " << fmt_vec(r.params.eta) << "  (tail function: "
           << (r.params.g == GTag::Zero ? "zero" : "quadraticTail") << ")\n";
        os << "  normalizer psi: " << fmt(r.params.psi) << "\n";
        os << "  transformed mean rate: " << fmt_vec(r.transformedMeanRate)
           << "\n";
        os << "  classification: "
           << (r.meanRateZero ? "martingale measure (EMM)"
                              : "supermartingale measure, not a martingale "
                                "measure (ESMM, not EMM)")
           << "\n";
    } else {
        os << "no equivalent supermartingale measure\n";
        if (r.witness.found)
            os << "  blocking arbitrage direction: " << fmt_vec(r.witness.xi)
               << "\n";
    }
    if (!r.note.empty()) os << "  note: " << r.note << "\n";
    return os.str();
}

std::string to_text(const CompletenessVerdict& r) {
    std::ostringstream os;
    os << "market is " << (r.complete ? "complete" : "incomplete");
    if (!r.complete) os << " (" << r.reason << ")";
    os << "; diffusion kernel dimension " << r.kernelDim << "\n";
    return os.str();
}

std::string to_text(const SimulationReport& r) {
    std::ostringstream os;
    os << r.statistic << ": " << fmt(r.estimate) << " +- " << fmt(r.stdError)
       << "  [" << (r.consistent ? "consistent" : "violated") << "]\n";
    os << "  paths: " << r.sampleSize << ", seed: " << r.seed
       << ", rng: " << r.rngFamily << "\n";
    for (const auto& [k, v] : r.details)
        os << "  " << k << ": " << fmt(v) << "\n";
    for (const std::string& n : r.notes) os << "  note: " << n << "\n";
    return os.str();
}

std::string to_text(const LogOptimalityReport& r) {
    std::ostringstream os;
    os << "log-wealth comparison against the growth-optimal portfolio\n";
    for (const LogOptimalityEntry& e : r.entries)
        os << "  pi = " << fmt_vec(e.pi) << ": analytic "
           << fmt(e.analyticLogExpectation) << ", mc " << fmt(e.mcLogMean)
           << " +- " << fmt(e.mcLogStdErr)
           << (e.jensenOrdered ? "" : "  [ordering violated]") << "\n";
    os << "  all ordered: " << (r.allOrdered ? "yes" : "no")
       << ", all nonpositive: " << (r.allNonPositive ? "yes" : "no") << "\n";
    return os.str();
}

void write_paths_csv(const std::string& path, const PathBundle& bundle,
                     int maxPaths) {
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot open CSV output file: " + path);
    const int n = std::min<int>(maxPaths, static_cast<int>(bundle.paths.size()));
    out << "path,time";
    for (int k = 0; k < bundle.dim; ++k) out << ",x" << k;
    out << "\n";
    for (int i = 0; i < n; ++i) {
        const SimPath& p = bundle.paths[i];
        Vec x = Vec::Zero(bundle.dim);
        out << i << "," << fmt(p.times[0]);
        for (int k = 0; k < bundle.dim; ++k) out << "," << fmt(x(k));
        out << "\n";
        for (int r = 0; r < p.intervals(); ++r) {
            for (int k = 0; k < bundle.dim; ++k)
                x(k) += p.incs[static_cast<std::size_t>(r) * bundle.dim + k];
            out << i << "," << fmt(p.times[r + 1]);
            for (int k = 0; k < bundle.dim; ++k) out << "," << fmt(x(k));
            out << "\n";
        }
    }
}

}  // namespace levy
