#pragma once

// Run summaries, expectation checks and trace CSV files.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dzvoc/cli/scenario.hpp"

namespace dzvoc::cli {

struct ExpectationCheck {
    std::string name;
    std::optional<double> measured;  ///< empty when the metric is unavailable
    double limit = 0.0;
    bool pass = false;
};

struct RunSummary {
    std::string scenario;
    ScenarioMetrics metrics;
    std::vector<ExpectationCheck> checks;
    bool pass = false;
    double runtime_s = 0.0;
};

/// Every declared expectation of `config` evaluated against `metrics`.
std::vector<ExpectationCheck> evaluate_expectations(const ScenarioConfig& config, const ScenarioMetrics& metrics);

RunSummary summarize(const ScenarioConfig& config, const ScenarioMetrics& metrics, double runtime_s);

nlohmann::json metrics_to_json(const ScenarioMetrics& metrics);
/// `include_runtime = false` gives a byte-stable summary for reproducibility checks.
nlohmann::json summary_to_json(const RunSummary& summary, bool include_runtime = true);

/// RFC 4180, header row, shortest round-trip number formatting.
void write_trace_csv(const Trace& trace, std::ostream& out);
void write_trace_csv(const Trace& trace, const std::filesystem::path& path);
Trace read_trace_csv(std::istream& in);
Trace read_trace_csv(const std::filesystem::path& path);

}  // namespace dzvoc::cli
