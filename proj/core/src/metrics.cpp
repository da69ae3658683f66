#include "cwpor/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "cwpor/digest.hpp"
#include "cwpor/error.hpp"

namespace cwpor {
namespace {

void require_nonempty(std::span<const TrialRecord> trials, const char* op) {
  if (trials.empty()) throw PreconditionError(std::string(op) + ": no trials");
}

double checked_weight(const TrialRecord& t) {
  const double c = t.confidence.combined;
  if (!std::isfinite(c) || c <= 0.0) {
    throw PreconditionError("cw_por: combined confidence must be finite and > 0");
  }
  return c;
}

// Linear interpolation between order statistics (Hyndman-Fan type 7).
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

}  // namespace

double por(std::span<const TrialRecord> trials) {
  require_nonempty(trials, "por");
  const auto overrides = std::count_if(trials.begin(), trials.end(), [](const TrialRecord& t) { return t.override; });
  return static_cast<double>(overrides) / static_cast<double>(trials.size());
}

double cw_por(std::span<const TrialRecord> trials) {
  require_nonempty(trials, "cw_por");
  double weighted = 0.0;
  double total = 0.0;
  for (const auto& t : trials) {
    const double c = checked_weight(t);
    total += c;
    if (t.override) weighted += c;
  }
  if (!(total > 0.0)) throw PreconditionError("cw_por: total confidence is zero");
  return weighted / total;
}

Interval bootstrap_ci(std::span<const TrialRecord> trials, Statistic statistic, int resamples,
                      double level, std::uint64_t seed) {
  require_nonempty(trials, "bootstrap_ci");
  if (resamples < 1) throw PreconditionError("bootstrap_ci: resamples must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw PreconditionError("bootstrap_ci: level must be in (0, 1)");
  if (statistic == Statistic::CwPor) {
    for (const auto& t : trials) checked_weight(t);
  }

  const auto n = trials.size();
  std::vector<double> stats(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    CounterRng rng(seed, static_cast<std::uint64_t>(b));
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& t = trials[rng.below(n)];
      const double w = statistic == Statistic::Por ? 1.0 : t.confidence.combined;
      den += w;
      if (t.override) num += w;
    }
    stats[static_cast<std::size_t>(b)] = num / den;
  }
  std::sort(stats.begin(), stats.end());
  const double alpha = (1.0 - level) / 2.0;
  return {quantile_sorted(stats, alpha), quantile_sorted(stats, 1.0 - alpha)};
}

GroupKey group_key_of(const TrialKey& key, GroupBy by) {
  GroupKey g;
  switch (by) {
    case GroupBy::Overall: break;
    case GroupBy::Category: g.category = key.category; break;
    case GroupBy::QuestionType: g.qtype = key.qtype; break;
    case GroupBy::Verbosity: g.verbosity = key.verbosity; break;
    case GroupBy::Model: g.model = key.model; break;
    case GroupBy::ModelByType:
      g.model = key.model;
      g.qtype = key.qtype;
      break;
    case GroupBy::ModelByVerbosity:
      g.model = key.model;
      g.verbosity = key.verbosity;
      break;
  }
  return g;
}

std::vector<MetricsSummary> group_metrics(std::span<const TrialRecord> trials, GroupBy by,
                                          const BootstrapOptions& bootstrap,
                                          std::span<const TrialKey> parse_failures) {
  if (trials.empty()) return {};

  std::map<GroupKey, std::vector<TrialRecord>> groups;
  std::set<std::string> all_questions;
  for (const auto& t : trials) {
    groups[group_key_of(t.key, by)].push_back(t);
    all_questions.insert(t.key.question_id);
  }
  std::map<GroupKey, std::size_t> failures;
  for (const auto& k : parse_failures) ++failures[group_key_of(k, by)];

  std::vector<MetricsSummary> out;
  out.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    MetricsSummary s;
    s.key = key;
    s.n = members.size();
    s.por = por(members);
    s.cw_por = cw_por(members);
    const auto ci = bootstrap_ci(members, Statistic::CwPor, bootstrap.resamples, bootstrap.level, bootstrap.seed);
    s.ci_low = std::min(ci.low, s.cw_por);
    s.ci_high = std::max(ci.high, s.cw_por);
    std::set<std::string_view> questions;
    for (const auto& t : members) questions.insert(t.key.question_id);
    s.question_share = static_cast<double>(questions.size()) / static_cast<double>(all_questions.size());
    if (auto it = failures.find(key); it != failures.end()) s.parse_failure_count = it->second;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TrendRow> confidence_trends(std::span<const TrialRecord> trials) {
  require_nonempty(trials, "confidence_trends");
  struct Acc {
    std::size_t n = 0;
    double llc = 0.0;
    double rubric = 0.0;
  };
  std::map<std::tuple<std::string, int, PickOutcome>, Acc> cells;
  for (const auto& t : trials) {
    auto& a = cells[{t.key.model, t.key.verbosity, t.override ? PickOutcome::Override : PickOutcome::Correct}];
    ++a.n;
    a.llc += t.confidence.llc;
    a.rubric += t.confidence.rubric_norm;
  }
  std::vector<TrendRow> out;
  out.reserve(cells.size());
  for (const auto& [key, a] : cells) {
    const auto n = static_cast<double>(a.n);
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), a.n, a.llc / n, a.rubric / n});
  }
  return out;
}

}  // namespace cwpor
