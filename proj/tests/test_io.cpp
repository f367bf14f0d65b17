#include <doctest.h>

#include <cmath>
#include <string>

#include <json.hpp>

#include "helpers.hpp"
#include "levy/common.hpp"
#include "levy/constraints.hpp"
#include "levy/esscher.hpp"
#include "levy/market_io.hpp"
#include "levy/numeraire.hpp"
#include "levy/report.hpp"

using namespace levy;
using testutil::fixture_path;
using testutil::load_fixture;
using testutil::v1;
using testutil::v2;

TEST_CASE("round trip preserves a mixed market spec") {
    const MarketSpecFile spec = load_fixture("bsm2d");
    const std::string text = serialize_market_spec(spec);
    const MarketSpecFile back = parse_market_spec(text);

    CHECK(back.schemaVersion == spec.schemaVersion);
    CHECK(back.description == spec.description);
    CHECK((back.market.b - spec.market.b).norm() == doctest::Approx(0.0));
    CHECK((back.market.c - spec.market.c).norm() == doctest::Approx(0.0));
    CHECK(back.constraints.kind() == spec.constraints.kind());
    CHECK(back.horizon.finite == spec.horizon.finite);
    CHECK(back.horizon.T == doctest::Approx(spec.horizon.T));
    CHECK(back.options.seed == spec.options.seed);
    CHECK(back.options.paths == spec.options.paths);
    CHECK(back.options.tolerance == doctest::Approx(spec.options.tolerance));
}

TEST_CASE("round trip preserves atoms, segments, and constraint details") {
    const MarketSpecFile spec = load_fixture("heavy_log_tail");
    const MarketSpecFile back = parse_market_spec(serialize_market_spec(spec));

    REQUIRE(back.market.nu.segments.size() == spec.market.nu.segments.size());
    for (const double x : {-0.9, -0.3, 0.5, 1.5, 4.0, 100.0}) {
        double before = 0.0, after = 0.0;
        for (const DensitySegment& seg : spec.market.nu.segments)
            before += seg.density1(x);
        for (const DensitySegment& seg : back.market.nu.segments)
            after += seg.density1(x);
        CHECK(after == doctest::Approx(before).epsilon(1e-12));
    }

    const MarketSpecFile atoms = load_fixture("two_atoms_incomplete");
    const MarketSpecFile atomsBack =
        parse_market_spec(serialize_market_spec(atoms));
    REQUIRE(atomsBack.market.nu.atoms.size() == atoms.market.nu.atoms.size());
    for (size_t i = 0; i < atoms.market.nu.atoms.size(); ++i) {
        CHECK(atomsBack.market.nu.atoms[i].rate ==
              doctest::Approx(atoms.market.nu.atoms[i].rate));
        CHECK((atomsBack.market.nu.atoms[i].x - atoms.market.nu.atoms[i].x)
                  .norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("infinite horizons and orthant constraints survive the round trip") {
    const MarketSpecFile spec = load_fixture("drift_up");
    CHECK(!spec.horizon.finite);
    CHECK(spec.constraints.kind() == ConstraintSet::Kind::Orthant);
    const MarketSpecFile back = parse_market_spec(serialize_market_spec(spec));
    CHECK(!back.horizon.finite);
    CHECK(back.constraints.kind() == ConstraintSet::Kind::Orthant);
    CHECK((back.constraints.signs() - spec.constraints.signs()).norm() ==
          doctest::Approx(0.0));
    CHECK(back.options.level == doctest::Approx(spec.options.level));
}

TEST_CASE("box bounds serialize infinities as strings") {
    const std::string text = R"({
      "schemaVersion": "1",
      "description": "one-sided box",
      "market": {"b": [0.1], "c": [[0.04]], "jumps": {"atoms": [], "segments": []}},
      "constraints": {"kind": "box", "lo": [0.0], "hi": ["inf"]},
      "horizon": {"finite": 1.0},
      "options": {}
    })";
    const MarketSpecFile spec = parse_market_spec(text);
    CHECK(spec.constraints.kind() == ConstraintSet::Kind::Box);
    CHECK(spec.constraints.lower()(0) == 0.0);
    CHECK(std::isinf(spec.constraints.upper()(0)));

    const MarketSpecFile back = parse_market_spec(serialize_market_spec(spec));
    CHECK(std::isinf(back.constraints.upper()(0)));
    CHECK(back.constraints.contains(v1(1e9)));
    CHECK(!back.constraints.contains(v1(-0.1)));
}

TEST_CASE("schema violations are rejected with SchemaError") {
    // Unknown top-level key.
    CHECK_THROWS_AS(load_fixture("bad_unknown_key"), SchemaError);

    const std::string base = R"({
      "schemaVersion": "1",
      "description": "d",
      "market": {"b": [0.0], "c": [[0.0]], "jumps": {"atoms": [], "segments": []}},
      "constraints": {"kind": "fullSpace"},
      "horizon": {"finite": 1.0},
      "options": {}
    })";
    CHECK_NOTHROW(parse_market_spec(base));

    // Wrong schema version.
    std::string bad = base;
    bad.replace(bad.find("\"1\""), 3, "\"9\"");
    CHECK_THROWS_AS(parse_market_spec(bad), SchemaError);

    // Missing drift vector.
    const std::string noB = R"({
      "schemaVersion": "1",
      "description": "d",
      "market": {"c": [[0.0]], "jumps": {"atoms": [], "segments": []}},
      "constraints": {"kind": "fullSpace"},
      "horizon": {"finite": 1.0},
      "options": {}
    })";
    CHECK_THROWS_AS(parse_market_spec(noB), SchemaError);

    // Covariance dimension mismatch.
    const std::string badDim = R"({
      "schemaVersion": "1",
      "description": "d",
      "market": {"b": [0.0, 0.0], "c": [[0.0]], "jumps": {"atoms": [], "segments": []}},
      "constraints": {"kind": "fullSpace"},
      "horizon": {"finite": 1.0},
      "options": {}
    })";
    CHECK_THROWS_AS(parse_market_spec(badDim), SchemaError);

    // Atom at the origin is not a jump.
    const std::string originAtom = R"({
      "schemaVersion": "1",
      "description": "d",
      "market": {"b": [0.0], "c": [[0.0]],
                 "jumps": {"atoms": [{"x": [0.0], "rate": 1.0}], "segments": []}},
      "constraints": {"kind": "fullSpace"},
      "horizon": {"finite": 1.0},
      "options": {}
    })";
    CHECK_THROWS_AS(parse_market_spec(originAtom), SchemaError);

    // Unknown constraint kind.
    const std::string badKind = R"({
      "schemaVersion": "1",
      "description": "d",
      "market": {"b": [0.0], "c": [[0.0]], "jumps": {"atoms": [], "segments": []}},
      "constraints": {"kind": "pentagon"},
      "horizon": {"finite": 1.0},
      "options": {}
    })";
    CHECK_THROWS_AS(parse_market_spec(badKind), SchemaError);
}

TEST_CASE("modifiers round-trip through serialization") {
    LevyTriplet trip = testutil::heavy_log_tail_market();
    trip.b = v1(0.1);

    MarketSpecFile spec;
    spec.schemaVersion = "1";
    spec.description = "tilt round trip";
    spec.market = trip;
    spec.constraints = ConstraintSet::full_space(1);
    spec.horizon = Horizon::finiteT(1.0);

    EsscherParams params;
    params.eta = v1(0.4);
    params.g = GTag::QuadraticTail;
    params.psi = psi(trip, params.eta, params.g);
    const MarketSpecFile tilted =
        with_transform(spec, transform_triplet(trip, params));
    CHECK(tilted.tilted);
    CHECK(tilted.tilt.eta(0) == doctest::Approx(0.4));

    const MarketSpecFile back =
        parse_market_spec(serialize_market_spec(tilted));
    CHECK(back.tilted);
    CHECK(back.tilt.eta(0) == doctest::Approx(0.4));
    CHECK(back.tilt.g == GTag::QuadraticTail);
    CHECK(back.tilt.psi == doctest::Approx(params.psi).epsilon(1e-12));

    // Densities (with the exp-tilt modifier folded in) agree at probes.
    for (const double x : {0.5, 1.5, 3.0, 20.0}) {
        double before = 0.0, after = 0.0;
        for (const DensitySegment& seg : tilted.market.nu.segments)
            before += seg.density1(x);
        for (const DensitySegment& seg : back.market.nu.segments)
            after += seg.density1(x);
        CHECK(after == doctest::Approx(before).epsilon(1e-12));
    }
}

TEST_CASE("every bundled fixture parses and validates") {
    const char* names[] = {
        "bsm1d",         "bsm2d",          "monotone_poisson",
        "affine_jumps_1d", "heavy_log_tail", "parabola",
        "esmm_not_emm",  "two_atoms_incomplete", "complete_one_atom",
        "symmetric_atoms", "drift_up",     "down_jumps",
    };
    for (const char* name : names) {
        CAPTURE(name);
        CHECK_NOTHROW(load_fixture(name));
    }
}

TEST_CASE("report JSON renderings parse as JSON") {
    const MarketSpecFile spec = load_fixture("bsm1d");
    const NflReport rep = nfl_report(spec.market, spec.constraints,
                                     spec.horizon);
    const nlohmann::json parsed = nlohmann::json::parse(to_json(rep));
    CHECK(parsed.contains("conditions"));
    CHECK(parsed["conditions"].contains("NFLVR"));

    const NumeraireResult num = solve_numeraire(spec.market, spec.constraints);
    const nlohmann::json numJson = nlohmann::json::parse(to_json(num));
    CHECK(numJson.contains("portfolio"));
    CHECK(numJson["portfolio"].size() == 1);

    const CompletenessVerdict cv =
        check_completeness(spec.market, spec.constraints);
    const nlohmann::json cvJson = nlohmann::json::parse(to_json(cv));
    CHECK(cvJson["complete"] == true);

    // Text renderings exist and are nonempty.
    CHECK(!to_text(rep).empty());
    CHECK(!to_text(num).empty());
    CHECK(!to_text(cv).empty());
}
