#pragma once

#include <string>
#include <vector>

#include "rctmiss/simulation.hpp"

#include "json.hpp"

namespace rctmiss {

// Machine-readable emission for one or more sample sizes of the same
// scenario. Deterministic: identical inputs produce byte-identical dumps
// (wall time deliberately stays out of it).
nlohmann::ordered_json report_json(const std::vector<SimulationReport>& reports);

// Fixed-width grid, one row per method and one column group per sample size,
// with the wall time as a footer.
std::string report_table(const std::vector<SimulationReport>& reports);

// One CSV row per (n, method); same fields as the JSON results array.
std::string report_csv(const std::vector<SimulationReport>& reports);

}  // namespace rctmiss
