#pragma once
// Machine-readable (JSON) and human-readable renderings of analysis results.

#include <string>

#include "levy/arbitrage.hpp"
#include "levy/esscher.hpp"
#include "levy/numeraire.hpp"
#include "levy/simulate.hpp"

namespace levy {

std::string to_json(const NflReport& r);
std::string to_json(const NumeraireResult& r);
std::string to_json(const EsmmResult& r);
std::string to_json(const CompletenessVerdict& r);
std::string to_json(const SimulationReport& r);
std::string to_json(const LogOptimalityReport& r);

std::string to_text(const NflReport& r);
std::string to_text(const NumeraireResult& r);
std::string to_text(const EsmmResult& r);
std::string to_text(const CompletenessVerdict& r);
std::string to_text(const SimulationReport& r);
std::string to_text(const LogOptimalityReport& r);

// Write one wealth/path matrix as CSV (paths as columns, grid time first).
void write_paths_csv(const std::string& path, const PathBundle& bundle,
                     int maxPaths = 64);

}  // namespace levy
