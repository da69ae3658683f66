#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>

#include "cwpor/metrics.hpp"
#include "cwpor/report.hpp"

namespace cwpor {

// Every renderer is deterministic (no timestamps, fixed float formatting,
// input order preserved) and throws PreconditionError on an empty table.

// CW-POR bars with bootstrap whiskers on the left axis and the question
// share polyline on the right axis.
std::string render_category_chart(std::span<const MetricsSummary> by_category);

// Adversarial vs non-adversarial bars grouped by model.
std::string render_type_model_chart(std::span<const MetricsSummary> by_type_model);

// One CW-POR line per model across verbosity levels. Single-point series
// are drawn as a marker.
std::string render_verbosity_chart(std::span<const MetricsSummary> by_verbosity_model);

// Grid with one column per model; top row mean LLC, bottom row mean rubric
// confidence. Correct picks are solid lines, overrides dashed.
std::string render_trend_grid(std::span<const TrendRow> trends);

// File name -> SVG document for all four charts.
std::map<std::string, std::string> render_charts(const SummaryTables& tables);

void write_charts(const SummaryTables& tables, const std::filesystem::path& dir);

}  // namespace cwpor
