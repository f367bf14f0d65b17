#pragma once
// JSON market-spec files: strict schema (unknown keys rejected), full
// round-trip including density-segment modifiers, so tilted markets can be
// written out and loaded back.

#include <cstdint>
#include <string>

#include "levy/arbitrage.hpp"
#include "levy/constraints.hpp"
#include "levy/esscher.hpp"

namespace levy {

struct AnalysisOptions {
    std::uint64_t seed = 1;
    int paths = 100000;
    double tolerance = 1e-9;
    double epsilon = 1e-3;     // simulator small-jump cutoff
    double level = 2.0;        // infinite-horizon demonstration target
    long maxIterations = 100000;
};

struct MarketSpecFile {
    std::string schemaVersion;
    std::string description;
    LevyTriplet market;
    ConstraintSet constraints = ConstraintSet::full_space(1);
    Horizon horizon = Horizon::finiteT(1.0);
    AnalysisOptions options;

    // Provenance annotation: set when this market was produced by an
    // exponential tilt of another market.
    bool tilted = false;
    EsscherParams tilt;
    std::string tiltNote;
};

// Parse/serialize; SchemaError on malformed input, unknown keys, wrong
// types, or dimension mismatches. The parsed market is validated.
MarketSpecFile parse_market_spec(const std::string& jsonText);
MarketSpecFile load_market_spec(const std::string& path);
std::string serialize_market_spec(const MarketSpecFile& spec);

// The same spec with the market replaced by the tilted triplet and a
// provenance block recording the transform parameters.
MarketSpecFile with_transform(const MarketSpecFile& base,
                              const TransformedTriplet& tt);

}  // namespace levy
