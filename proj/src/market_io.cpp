#include "levy/market_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace levy {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw SchemaError(where + ": " + what);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    if (!obj.is_object()) fail(where, "expected a JSON object");
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok) fail(where, "unknown key \"" + item.key() + "\"");
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(where, std::string("missing key \"") + key + "\"");
    return *it;
}

double num(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

double num_or(const json& obj, const char* key, double dflt,
              const std::string& where) {
    auto it = obj.find(key);
    return it == obj.end() ? dflt : num(*it, where + "." + key);
}

// Box bounds admit "inf" / "-inf" strings alongside numbers.
double bound(const json& j, const std::string& where) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        fail(where, "expected a number or \"inf\"/\"-inf\", got \"" + s + "\"");
    }
    return num(j, where);
}

Vec vec(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array");
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<int>(i)) = num(j[i], where + "[" + std::to_string(i) + "]");
    return v;
}

Mat mat(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) fail(where, "rows must be nonempty arrays");
    Mat m(j.size(), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        const json& row = j[r];
        if (!row.is_array() || row.size() != cols)
            fail(where, "row " + std::to_string(r) + " has the wrong length");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<int>(r), static_cast<int>(c)) =
                num(row[c], where + "[" + std::to_string(r) + "][" +
                                std::to_string(c) + "]");
    }
    return m;
}

GTag parse_g(const json& j, const std::string& where) {
    if (!j.is_string()) fail(where, "expected \"zero\" or \"quadraticTail\"");
    const std::string s = j.get<std::string>();
    if (s == "zero") return GTag::Zero;
    if (s == "quadraticTail") return GTag::QuadraticTail;
    fail(where, "unknown tail function \"" + s + "\"");
}

Family1D parse_factor(const json& j, const std::string& where) {
    check_keys(j, {"family", "coeffs", "lo", "hi", "p", "q", "x0", "scale", "dir"},
               where);
    const json& famj = require(j, "family", where);
    if (!famj.is_string()) fail(where, "family must be a string");
    const std::string fam = famj.get<std::string>();
    if (fam == "polynomial") {
        const json& cj = require(j, "coeffs", where);
        if (!cj.is_array() || cj.empty()) fail(where, "coeffs must be a nonempty array");
        std::vector<double> coeffs;
        for (std::size_t i = 0; i < cj.size(); ++i)
            coeffs.push_back(num(cj[i], where + ".coeffs"));
        return Family1D::polynomial(coeffs, num(require(j, "lo", where), where + ".lo"),
                                    num(require(j, "hi", where), where + ".hi"));
    }
    const double x0 = num_or(j, "x0", 1.0, where);
    const double scale = num_or(j, "scale", 1.0, where);
    const int dir = static_cast<int>(num_or(j, "dir", 1.0, where));
    if (fam == "powerLaw")
        return Family1D::power_law(num(require(j, "p", where), where + ".p"), x0,
                                   scale, dir);
    if (fam == "powerLog")
        return Family1D::power_log(num(require(j, "q", where), where + ".q"), x0,
                                   scale, dir);
    fail(where, "unknown density family \"" + fam + "\"");
}

Modifier parse_modifier(const json& j, int dim, const std::string& where) {
    check_keys(j, {"kind", "eta", "g", "n"}, where);
    const json& kj = require(j, "kind", where);
    if (!kj.is_string()) fail(where, "kind must be a string");
    const std::string kind = kj.get<std::string>();
    if (kind == "expTilt") {
        Vec eta = vec(require(j, "eta", where), where + ".eta");
        if (eta.size() != dim) fail(where, "eta dimension mismatch");
        GTag g = GTag::Zero;
        if (j.contains("g")) g = parse_g(j["g"], where + ".g");
        return Modifier::exp_tilt(std::move(eta), g);
    }
    if (kind == "logTame") {
        const double n = num(require(j, "n", where), where + ".n");
        if (n < 1 || n != std::floor(n)) fail(where, "n must be a positive integer");
        return Modifier::log_tame(static_cast<int>(n));
    }
    fail(where, "unknown modifier kind \"" + kind + "\"");
}

LevyTriplet parse_market(const json& j) {
    const std::string where = "market";
    check_keys(j, {"b", "c", "jumps"}, where);
    LevyTriplet trip;
    trip.b = vec(require(j, "b", where), where + ".b");
    trip.dim = static_cast<int>(trip.b.size());
    trip.c = mat(require(j, "c", where), where + ".c");
    if (trip.c.rows() != trip.dim || trip.c.cols() != trip.dim)
        fail(where + ".c", "must be a " + std::to_string(trip.dim) + "x" +
                               std::to_string(trip.dim) + " matrix");
    trip.nu.dim = trip.dim;
    if (j.contains("jumps")) {
        const json& jj = j["jumps"];
        check_keys(jj, {"atoms", "segments"}, where + ".jumps");
        if (jj.contains("atoms")) {
            const json& aj = jj["atoms"];
            if (!aj.is_array()) fail(where + ".jumps.atoms", "expected an array");
            for (std::size_t i = 0; i < aj.size(); ++i) {
                const std::string aw =
                    where + ".jumps.atoms[" + std::to_string(i) + "]";
                check_keys(aj[i], {"x", "rate"}, aw);
                Atom a;
                a.x = vec(require(aj[i], "x", aw), aw + ".x");
                if (a.x.size() != trip.dim) fail(aw, "atom dimension mismatch");
                a.rate = num(require(aj[i], "rate", aw), aw + ".rate");
                trip.nu.atoms.push_back(std::move(a));
            }
        }
        if (jj.contains("segments")) {
            const json& sj = jj["segments"];
            if (!sj.is_array()) fail(where + ".jumps.segments", "expected an array");
            for (std::size_t i = 0; i < sj.size(); ++i) {
                const std::string sw =
                    where + ".jumps.segments[" + std::to_string(i) + "]";
                check_keys(sj[i], {"factors", "modifiers"}, sw);
                DensitySegment seg;
                const json& fj = require(sj[i], "factors", sw);
                if (!fj.is_array() || fj.empty())
                    fail(sw + ".factors", "expected a nonempty array");
                for (std::size_t f = 0; f < fj.size(); ++f)
                    seg.factors.push_back(parse_factor(
                        fj[f], sw + ".factors[" + std::to_string(f) + "]"));
                if (static_cast<int>(seg.factors.size()) != trip.dim)
                    fail(sw, "need one factor per asset");
                if (sj[i].contains("modifiers")) {
                    const json& mj = sj[i]["modifiers"];
                    if (!mj.is_array()) fail(sw + ".modifiers", "expected an array");
                    for (std::size_t m = 0; m < mj.size(); ++m)
                        seg.modifiers.push_back(parse_modifier(
                            mj[m], trip.dim,
                            sw + ".modifiers[" + std::to_string(m) + "]"));
                }
                trip.nu.segments.push_back(std::move(seg));
            }
        }
    }
    return trip;
}

ConstraintSet parse_constraints(const json& j, int dim, const std::string& where) {
    check_keys(j, {"kind", "signs", "lo", "hi", "A", "b", "rays", "parts"}, where);
    const json& kj = require(j, "kind", where);
    if (!kj.is_string()) fail(where, "kind must be a string");
    const std::string kind = kj.get<std::string>();
    if (kind == "fullSpace") return ConstraintSet::full_space(dim);
    if (kind == "orthant") {
        Vec signs = vec(require(j, "signs", where), where + ".signs");
        if (signs.size() != dim) fail(where, "signs dimension mismatch");
        return ConstraintSet::orthant(std::move(signs));
    }
    if (kind == "box") {
        const json& loj = require(j, "lo", where);
        const json& hij = require(j, "hi", where);
        if (!loj.is_array() || !hij.is_array() ||
            static_cast<int>(loj.size()) != dim ||
            static_cast<int>(hij.size()) != dim)
            fail(where, "lo/hi must be arrays of length " + std::to_string(dim));
        Vec lo(dim), hi(dim);
        for (int i = 0; i < dim; ++i) {
            lo(i) = bound(loj[i], where + ".lo");
            hi(i) = bound(hij[i], where + ".hi");
        }
        return ConstraintSet::box(std::move(lo), std::move(hi));
    }
    if (kind == "polyhedron") {
        Mat A = mat(require(j, "A", where), where + ".A");
        Vec b = vec(require(j, "b", where), where + ".b");
        if (A.cols() != dim || A.rows() != b.size())
            fail(where, "A must have " + std::to_string(dim) +
                            " columns and one row per entry of b");
        return ConstraintSet::polyhedron(std::move(A), std::move(b));
    }
    if (kind == "cone") {
        const json& rj = require(j, "rays", where);
        if (!rj.is_array() || rj.empty())
            fail(where + ".rays", "expected a nonempty array of rays");
        Mat R(dim, rj.size());
        for (std::size_t c = 0; c < rj.size(); ++c) {
            Vec ray = vec(rj[c], where + ".rays[" + std::to_string(c) + "]");
            if (ray.size() != dim) fail(where, "ray dimension mismatch");
            R.col(static_cast<int>(c)) = ray;
        }
        return ConstraintSet::polyhedral_cone(std::move(R));
    }
    if (kind == "parabola") {
        if (dim != 2) fail(where, "the parabola set lives in two dimensions");
        return ConstraintSet::parabola();
    }
    if (kind == "intersection") {
        const json& pj = require(j, "parts", where);
        if (!pj.is_array() || pj.size() < 2)
            fail(where + ".parts", "expected at least two parts");
        std::vector<ConstraintSet> parts;
        for (std::size_t i = 0; i < pj.size(); ++i)
            parts.push_back(parse_constraints(
                pj[i], dim, where + ".parts[" + std::to_string(i) + "]"));
        return ConstraintSet::intersection(std::move(parts));
    }
    fail(where, "unknown constraint kind \"" + kind + "\"");
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

json jvec(const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json jmat(const Mat& m) {
    json a = json::array();
    for (int r = 0; r < m.rows(); ++r) a.push_back(jvec(m.row(r).transpose()));
    return a;
}

json jbound(double x) {
    if (std::isinf(x)) return x > 0 ? json("inf") : json("-inf");
    return json(x);
}

json dump_factor(const Family1D& f) {
    json j;
    switch (f.kind) {
        case Family1D::Kind::PolynomialOnInterval:
            j["family"] = "polynomial";
            j["coeffs"] = f.coeffs;
            j["lo"] = f.lo;
            j["hi"] = f.hi;
            return j;
        case Family1D::Kind::PowerLawTail:
            j["family"] = "powerLaw";
            j["p"] = f.p;
            break;
        case Family1D::Kind::PowerLogTail:
            j["family"] = "powerLog";
            j["q"] = f.q;
            break;
    }
    j["x0"] = f.x0;
    j["scale"] = f.scale;
    j["dir"] = f.dir;
    return j;
}

json dump_modifier(const Modifier& m) {
    json j;
    if (m.kind == Modifier::Kind::ExpTilt) {
        j["kind"] = "expTilt";
        j["eta"] = jvec(m.eta);
        j["g"] = m.g == GTag::Zero ? "zero" : "quadraticTail";
    } else {
        j["kind"] = "logTame";
        j["n"] = m.n;
    }
    return j;
}

json dump_market(const LevyTriplet& trip) {
    json j;
    j["b"] = jvec(trip.b);
    j["c"] = jmat(trip.c);
    if (!trip.nu.is_zero()) {
        json jumps;
        if (!trip.nu.atoms.empty()) {
            json atoms = json::array();
            for (const Atom& a : trip.nu.atoms)
                atoms.push_back({{"x", jvec(a.x)}, {"rate", a.rate}});
            jumps["atoms"] = atoms;
        }
        if (!trip.nu.segments.empty()) {
            json segs = json::array();
            for (const DensitySegment& s : trip.nu.segments) {
                json seg;
                json factors = json::array();
                for (const Family1D& f : s.factors) factors.push_back(dump_factor(f));
                seg["factors"] = factors;
                if (!s.modifiers.empty()) {
                    json mods = json::array();
                    for (const Modifier& m : s.modifiers)
                        mods.push_back(dump_modifier(m));
                    seg["modifiers"] = mods;
                }
                segs.push_back(seg);
            }
            jumps["segments"] = segs;
        }
        j["jumps"] = jumps;
    }
    return j;
}

json dump_constraints(const ConstraintSet& C) {
    json j;
    switch (C.kind()) {
        case ConstraintSet::Kind::FullSpace:
            j["kind"] = "fullSpace";
            return j;
        case ConstraintSet::Kind::Orthant:
            j["kind"] = "orthant";
            j["signs"] = jvec(C.signs());
            return j;
        case ConstraintSet::Kind::Box: {
            j["kind"] = "box";
            json lo = json::array(), hi = json::array();
            for (int i = 0; i < C.dim(); ++i) {
                lo.push_back(jbound(C.lower()(i)));
                hi.push_back(jbound(C.upper()(i)));
            }
            j["lo"] = lo;
            j["hi"] = hi;
            return j;
        }
        case ConstraintSet::Kind::Polyhedron:
            j["kind"] = "polyhedron";
            j["A"] = jmat(C.ineq_matrix());
            j["b"] = jvec(C.ineq_rhs());
            return j;
        case ConstraintSet::Kind::PolyhedralCone: {
            j["kind"] = "cone";
            json rays = json::array();
            for (int c = 0; c < C.rays().cols(); ++c)
                rays.push_back(jvec(C.rays().col(c)));
            j["rays"] = rays;
            return j;
        }
        case ConstraintSet::Kind::Parabola:
            j["kind"] = "parabola";
            return j;
        case ConstraintSet::Kind::Intersection: {
            j["kind"] = "intersection";
            json parts = json::array();
            for (const ConstraintSet& p : C.parts())
                parts.push_back(dump_constraints(p));
            j["parts"] = parts;
            return j;
        }
    }
    throw LevyError("unreachable constraint kind");
}

}  // namespace

MarketSpecFile parse_market_spec(const std::string& jsonText) {
    json j;
    try {
        j = json::parse(jsonText);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed JSON: ") + e.what());
    }
    check_keys(j, {"schemaVersion", "description", "market", "constraints",
                   "horizon", "options", "provenance"},
               "spec");

    MarketSpecFile spec;
    const json& vj = require(j, "schemaVersion", "spec");
    if (!vj.is_string()) fail("spec.schemaVersion", "expected a string");
    spec.schemaVersion = vj.get<std::string>();
    if (spec.schemaVersion != "1")
        fail("spec.schemaVersion",
             "unsupported version \"" + spec.schemaVersion + "\" (expected \"1\")");
    if (j.contains("description")) {
        if (!j["description"].is_string())
            fail("spec.description", "expected a string");
        spec.description = j["description"].get<std::string>();
    }

    spec.market = parse_market(require(j, "market", "spec"));
    spec.market.validate();

    if (j.contains("constraints"))
        spec.constraints =
            parse_constraints(j["constraints"], spec.market.dim, "constraints");
    else
        spec.constraints = ConstraintSet::full_space(spec.market.dim);

    if (j.contains("horizon")) {
        const json& hj = j["horizon"];
        if (hj.is_string()) {
            if (hj.get<std::string>() != "infinite")
                fail("spec.horizon", "expected \"infinite\" or {\"finite\": T}");
            spec.horizon = Horizon::infinite();
        } else {
            check_keys(hj, {"finite"}, "spec.horizon");
            spec.horizon =
                Horizon::finiteT(num(require(hj, "finite", "spec.horizon"),
                                     "spec.horizon.finite"));
        }
    }

    if (j.contains("options")) {
        const json& oj = j["options"];
        check_keys(oj, {"seed", "paths", "tolerance", "epsilon", "level",
                        "maxIterations"},
                   "spec.options");
        const double seed = num_or(oj, "seed", 1.0, "spec.options");
        if (seed < 0 || seed != std::floor(seed))
            fail("spec.options.seed", "expected a nonnegative integer");
        spec.options.seed = static_cast<std::uint64_t>(seed);
        const double paths = num_or(oj, "paths", 100000.0, "spec.options");
        if (paths < 1 || paths != std::floor(paths))
            fail("spec.options.paths", "expected a positive integer");
        spec.options.paths = static_cast<int>(paths);
        spec.options.tolerance = num_or(oj, "tolerance", 1e-9, "spec.options");
        spec.options.epsilon = num_or(oj, "epsilon", 1e-3, "spec.options");
        spec.options.level = num_or(oj, "level", 2.0, "spec.options");
        const double mi = num_or(oj, "maxIterations", 100000.0, "spec.options");
        if (mi < 1 || mi != std::floor(mi))
            fail("spec.options.maxIterations", "expected a positive integer");
        spec.options.maxIterations = static_cast<long>(mi);
    }

    if (j.contains("provenance")) {
        const json& pj = j["provenance"];
        check_keys(pj, {"transform", "eta", "g", "psi", "note"}, "spec.provenance");
        const json& tj = require(pj, "transform", "spec.provenance");
        if (!tj.is_string() || tj.get<std::string>() != "exponentialTilt")
            fail("spec.provenance.transform", "expected \"exponentialTilt\"");
        spec.tilted = true;
        spec.tilt.eta =
            vec(require(pj, "eta", "spec.provenance"), "spec.provenance.eta");
        if (spec.tilt.eta.size() != spec.market.dim)
            fail("spec.provenance.eta", "dimension mismatch");
        spec.tilt.g = pj.contains("g") ? parse_g(pj["g"], "spec.provenance.g")
                                       : GTag::Zero;
        spec.tilt.psi = num_or(pj, "psi", 0.0, "spec.provenance");
        if (pj.contains("note")) {
            if (!pj["note"].is_string())
                fail("spec.provenance.note", "expected a string");
            spec.tiltNote = pj["note"].get<std::string>();
        }
    }
    return spec;
}

MarketSpecFile load_market_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open spec file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_market_spec(buf.str());
}

std::string serialize_market_spec(const MarketSpecFile& spec) {
    json j;
    j["schemaVersion"] = "1";
    if (!spec.description.empty()) j["description"] = spec.description;
    j["market"] = dump_market(spec.market);
    j["constraints"] = dump_constraints(spec.constraints);
    if (spec.horizon.finite)
        j["horizon"] = {{"finite", spec.horizon.T}};
    else
        j["horizon"] = "infinite";
    j["options"] = {{"seed", spec.options.seed},
                    {"paths", spec.options.paths},
                    {"tolerance", spec.options.tolerance},
                    {"epsilon", spec.options.epsilon},
                    {"level", spec.options.level},
                    {"maxIterations", spec.options.maxIterations}};
    if (spec.tilted) {
        json p;
        p["transform"] = "exponentialTilt";
        p["eta"] = jvec(spec.tilt.eta);
        p["g"] = spec.tilt.g == GTag::Zero ? "zero" : "quadraticTail";
        p["psi"] = spec.tilt.psi;
        if (!spec.tiltNote.empty()) p["note"] = spec.tiltNote;
        j["provenance"] = p;
    }
    return j.dump(2) + "\n";
}

MarketSpecFile with_transform(const MarketSpecFile& base,
                              const TransformedTriplet& tt) {
    MarketSpecFile out = base;
    out.market = tt.triplet;
    out.tilted = true;
    out.tilt = tt.params;
    out.tiltNote = "exponential tilt of: " +
                   (base.description.empty() ? std::string("unnamed market")
                                             : base.description);
    return out;
}

}  // namespace levy
