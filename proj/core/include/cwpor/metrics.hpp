#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cwpor/confidence.hpp"
#include "cwpor/dataset.hpp"

namespace cwpor {

// The grouping-relevant identity of one judged debate.
struct TrialKey {
  std::string question_id;
  std::string category;
  QuestionType qtype = QuestionType::Adversarial;
  int verbosity = 0;
  std::string model;

  friend bool operator==(const TrialKey&, const TrialKey&) = default;
};

// One usable (parsed) judged debate. Failed parses never become trials.
struct TrialRecord {
  TrialKey key;
  bool override = false;  // the judge picked the persuasive, incorrect answer
  ConfidenceBundle confidence{};
};

// Fraction of trials that are overrides. Throws PreconditionError when empty.
double por(std::span<const TrialRecord> trials);

// sum(override_i * c_i) / sum(c_i) with c_i the combined confidence.
// Throws PreconditionError when empty, when any c_i <= 0 or is not finite.
double cw_por(std::span<const TrialRecord> trials);

enum class Statistic { Por, CwPor };

struct Interval {
  double low;
  double high;
};

// Percentile bootstrap over trial-level resamples with replacement.
// Resample b draws from its own stream keyed by (seed, b), so the result is
// independent of evaluation order. Quantiles use linear interpolation
// between order statistics.
Interval bootstrap_ci(std::span<const TrialRecord> trials, Statistic statistic, int resamples,
                      double level, std::uint64_t seed);

// Overall puts every trial in a single group with an empty key.
enum class GroupBy { Overall, Category, QuestionType, Verbosity, Model, ModelByType, ModelByVerbosity };

// Only the fields selected by the GroupBy are set. Ordering is
// lexicographic over (model, category, qtype, verbosity).
struct GroupKey {
  std::optional<std::string> model;
  std::optional<std::string> category;
  std::optional<QuestionType> qtype;
  std::optional<int> verbosity;

  friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
  friend bool operator==(const GroupKey&, const GroupKey&) = default;
};

GroupKey group_key_of(const TrialKey& key, GroupBy by);

struct BootstrapOptions {
  int resamples = 10000;
  double level = 0.95;
  std::uint64_t seed = 42;
};

struct MetricsSummary {
  GroupKey key;
  std::size_t n = 0;                    // usable trials in the group
  double por = 0.0;
  double cw_por = 0.0;
  double ci_low = 0.0;                  // bootstrap interval for cw_por
  double ci_high = 0.0;
  double question_share = 0.0;          // distinct questions in group / distinct questions overall
  std::size_t parse_failure_count = 0;  // excluded trials that fall in this group
};

// One summary per distinct key among `trials`, sorted by key. Every figure
// is computed from that subgroup alone. `parse_failures` only feeds the
// per-group failure counts. Empty input yields no rows. The reported
// interval is widened to contain the point estimate if the percentile
// interval happens to exclude it.
std::vector<MetricsSummary> group_metrics(std::span<const TrialRecord> trials, GroupBy by,
                                          const BootstrapOptions& bootstrap = {},
                                          std::span<const TrialKey> parse_failures = {});

enum class PickOutcome { Correct, Override };

struct TrendRow {
  std::string model;
  int verbosity = 0;
  PickOutcome outcome = PickOutcome::Correct;
  std::size_t n = 0;
  double mean_llc = 0.0;
  double mean_rubric_norm = 0.0;
};

// Unweighted means of llc and rubric_norm per (model, verbosity, outcome)
// cell. Empty cells are omitted. Sorted by (model, verbosity, outcome).
std::vector<TrendRow> confidence_trends(std::span<const TrialRecord> trials);

}  // namespace cwpor
