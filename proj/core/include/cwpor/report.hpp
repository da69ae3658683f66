#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cwpor/metrics.hpp"
#include "cwpor/run_log.hpp"

namespace cwpor {

struct RunOverview {
  std::size_t questions = 0;
  std::size_t verbosity_levels = 0;
  std::size_t expected_instances = 0;
  LogTally tally;
  // Whole-run figures; absent when the run has no usable trial.
  std::optional<MetricsSummary> overall;
  std::string template_version;
  std::string config_fingerprint;
};

struct SummaryTables {
  std::vector<MetricsSummary> by_category;
  std::vector<MetricsSummary> by_type_model;
  std::vector<MetricsSummary> by_verbosity_model;
  std::vector<TrendRow> confidence_trends;
  RunOverview overview;
};

// All aggregation is delegated to the metrics module; bootstrap intervals
// are seeded with the run's seed unless `bootstrap` overrides it.
SummaryTables summarize(const RunLog& log, std::optional<BootstrapOptions> bootstrap = std::nullopt);
SummaryTables summarize(const std::filesystem::path& log_path,
                        std::optional<BootstrapOptions> bootstrap = std::nullopt);

// 12 significant digits, "%.12g".
std::string format_number(double value);

// CSV renderings (header row, LF endings), keyed by file name:
// by_category.csv, by_type_model.csv, by_verbosity_model.csv,
// confidence_trends.csv, run_overview.csv.
std::map<std::string, std::string> render_tables(const SummaryTables& tables);

// Writes render_tables() into `dir`, creating it if needed.
void write_tables(const SummaryTables& tables, const std::filesystem::path& dir);

}  // namespace cwpor
