#pragma once

#include <json.hpp>

#include "compost/linearized.hpp"
#include "compost/selection.hpp"
#include "compost/simharness.hpp"

namespace compost {

// JSON shapes are versioned via a top-level "schema_version" on every document
// the CLI writes. Key order is fixed (ordered_json) so reruns are
// byte-identical.
inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

Json selection_trace_to_json(const SelectionTrace& trace);
Json study_report_to_json(const StudyReport& report);
Json rate_report_to_json(const RateReport& report);

/// Tidy CSV: one row per column x scheme x selector.
std::string study_report_to_csv(const StudyReport& report);

}  // namespace compost
