#include "cwpor/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cwpor/csv.hpp"
#include "cwpor/error.hpp"

namespace cwpor {
namespace {

csv::Row metric_cells(const MetricsSummary& s) {
  return {std::to_string(s.n),          format_number(s.por),    format_number(s.cw_por),
          format_number(s.ci_low),      format_number(s.ci_high), format_number(s.question_share),
          std::to_string(s.parse_failure_count)};
}

const csv::Row kMetricColumns = {"n", "por", "cw_por", "ci_low", "ci_high", "question_share", "parse_failure_count"};

csv::Row concat(csv::Row head, const csv::Row& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

SummaryTables summarize(const RunLog& log, std::optional<BootstrapOptions> bootstrap) {
  const BootstrapOptions boot = bootstrap.value_or(BootstrapOptions{10000, 0.95, log.header.seed});

  std::vector<TrialRecord> trials;
  std::vector<TrialKey> failures;
  for (const auto& entry : log.entries) {
    const auto* t = std::get_if<TrialEntry>(&entry);
    if (!t) continue;
    if (auto record = to_trial_record(*t)) {
      trials.push_back(std::move(*record));
    } else {
      failures.push_back(t->key);
    }
  }

  SummaryTables out;
  out.overview.questions = log.header.question_count;
  out.overview.verbosity_levels = log.header.verbosity_levels.size();
  out.overview.expected_instances = log.header.expected_entries();
  out.overview.tally = tally(log);
  out.overview.template_version = log.header.template_version;
  out.overview.config_fingerprint = log.header.config_fingerprint;
  if (trials.empty()) return out;

  out.overview.overall = group_metrics(trials, GroupBy::Overall, boot, failures).front();
  out.by_category = group_metrics(trials, GroupBy::Category, boot, failures);
  out.by_type_model = group_metrics(trials, GroupBy::ModelByType, boot, failures);
  out.by_verbosity_model = group_metrics(trials, GroupBy::ModelByVerbosity, boot, failures);
  out.confidence_trends = confidence_trends(trials);
  return out;
}

SummaryTables summarize(const std::filesystem::path& log_path, std::optional<BootstrapOptions> bootstrap) {
  return summarize(read_run_log(log_path), bootstrap);
}

std::map<std::string, std::string> render_tables(const SummaryTables& tables) {
  std::map<std::string, std::string> files;

  {
    std::ostringstream out;
    csv::write_row(out, concat({"category"}, kMetricColumns));
    for (const auto& s : tables.by_category) csv::write_row(out, concat({s.key.category.value_or("")}, metric_cells(s)));
    files["by_category.csv"] = out.str();
  }
  {
    std::ostringstream out;
    csv::write_row(out, concat({"model", "qtype"}, kMetricColumns));
    for (const auto& s : tables.by_type_model) {
      csv::write_row(out, concat({s.key.model.value_or(""), s.key.qtype ? std::string(to_string(*s.key.qtype)) : ""},
                                 metric_cells(s)));
    }
    files["by_type_model.csv"] = out.str();
  }
  {
    std::ostringstream out;
    csv::write_row(out, concat({"model", "verbosity"}, kMetricColumns));
    for (const auto& s : tables.by_verbosity_model) {
      csv::write_row(out, concat({s.key.model.value_or(""), std::to_string(s.key.verbosity.value_or(0))},
                                 metric_cells(s)));
    }
    files["by_verbosity_model.csv"] = out.str();
  }
  {
    std::ostringstream out;
    csv::write_row(out, {"model", "verbosity", "pick", "n", "mean_llc", "mean_rubric_norm"});
    for (const auto& r : tables.confidence_trends) {
      csv::write_row(out, {r.model, std::to_string(r.verbosity), r.outcome == PickOutcome::Correct ? "correct" : "override",
                           std::to_string(r.n), format_number(r.mean_llc), format_number(r.mean_rubric_norm)});
    }
    files["confidence_trends.csv"] = out.str();
  }
  {
    const auto& o = tables.overview;
    std::ostringstream out;
    csv::write_row(out, {"questions", "verbosity_levels", "expected_instances", "trials", "parse_failures",
                         "instance_errors", "n", "por", "cw_por", "ci_low", "ci_high", "template_version",
                         "config_fingerprint"});
    csv::Row row = {std::to_string(o.questions), std::to_string(o.verbosity_levels),
                    std::to_string(o.expected_instances), std::to_string(o.tally.trials),
                    std::to_string(o.tally.parse_failures), std::to_string(o.tally.instance_errors)};
    if (o.overall) {
      const auto& s = *o.overall;
      row.insert(row.end(), {std::to_string(s.n), format_number(s.por), format_number(s.cw_por),
                             format_number(s.ci_low), format_number(s.ci_high)});
    } else {
      row.insert(row.end(), {"0", "", "", "", ""});
    }
    row.push_back(o.template_version);
    row.push_back(o.config_fingerprint);
    csv::write_row(out, row);
    files["run_overview.csv"] = out.str();
  }
  return files;
}

void write_tables(const SummaryTables& tables, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, text] : render_tables(tables)) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error("cannot write " + (dir / name).string());
  }
}

}  // namespace cwpor
