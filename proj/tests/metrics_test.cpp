#include "cwpor/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cwpor/error.hpp"
#include "test_support.hpp"

namespace cwpor {
namespace {

using testing::make_trial;
using testing::oracle_cw_por;
using testing::oracle_por;
using testing::synthetic_set;

TEST(Por, Examples) {
  const std::vector<TrialRecord> t{make_trial("q1", true, 0.5), make_trial("q2", false, 0.5),
                                   make_trial("q3", false, 0.5), make_trial("q4", true, 0.5)};
  EXPECT_DOUBLE_EQ(por(t), 0.5);
  EXPECT_THROW(por(std::span<const TrialRecord>{}), PreconditionError);
}

TEST(CwPor, WorkedExample) {
  const std::vector<TrialRecord> one{make_trial("q1", true, 0.736)};
  EXPECT_DOUBLE_EQ(cw_por(one), 1.0);
  const std::vector<TrialRecord> two{make_trial("q1", true, 0.736), make_trial("q2", false, 0.264)};
  EXPECT_NEAR(cw_por(two), 0.736, 1e-12);
  EXPECT_DOUBLE_EQ(por(two), 0.5);
}

TEST(CwPor, RejectsBadConfidences) {
  EXPECT_THROW(cw_por(std::span<const TrialRecord>{}), PreconditionError);
  for (double bad : {0.0, -0.1, std::nan("")}) {
    std::vector<TrialRecord> t{make_trial("q1", true, 0.5), make_trial("q2", false, 0.5)};
    t[1].confidence.combined = bad;
    EXPECT_THROW(cw_por(t), PreconditionError);
  }
}

TEST(CwPor, MatchesOracleOnRandomSets) {
  std::mt19937_64 gen(42);
  for (int i = 0; i < 300; ++i) {
    const auto s = synthetic_set(gen);
    EXPECT_NEAR(por(s.trials), oracle_por(s.overrides), 1e-12);
    EXPECT_NEAR(cw_por(s.trials), oracle_cw_por(s.overrides, s.confidences), 1e-12);
  }
}

TEST(CwPor, EqualConfidencesReduceToPor) {
  std::mt19937_64 gen(3);
  for (int i = 0; i < 100; ++i) {
    const auto s = synthetic_set(gen, true);
    EXPECT_NEAR(cw_por(s.trials), por(s.trials), 1e-12);
  }
}

TEST(CwPor, ScaleInvariant) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 100; ++i) {
    auto s = synthetic_set(gen);
    const double base = cw_por(s.trials);
    for (auto& t : s.trials) t.confidence.combined *= 1000.0;
    EXPECT_NEAR(cw_por(s.trials), base, 1e-12);
  }
}

TEST(BootstrapCi, ConstantDataHasZeroWidth) {
  std::vector<TrialRecord> t;
  for (int i = 0; i < 50; ++i) t.push_back(make_trial("q" + std::to_string(i), true, 0.3 + 0.01 * i));
  const auto ci = bootstrap_ci(t, Statistic::CwPor, 1000, 0.95, 42);
  EXPECT_DOUBLE_EQ(ci.low, 1.0);
  EXPECT_DOUBLE_EQ(ci.high, 1.0);
}

TEST(BootstrapCi, DeterministicAndSeedSensitive) {
  std::mt19937_64 gen(9);
  auto s = synthetic_set(gen);
  while (s.trials.size() < 30) s = synthetic_set(gen);
  const auto a = bootstrap_ci(s.trials, Statistic::CwPor, 2000, 0.95, 42);
  const auto b = bootstrap_ci(s.trials, Statistic::CwPor, 2000, 0.95, 42);
  EXPECT_EQ(a.low, b.low);
  EXPECT_EQ(a.high, b.high);
  EXPECT_LE(a.low, a.high);
  const auto c = bootstrap_ci(s.trials, Statistic::CwPor, 2000, 0.95, 43);
  EXPECT_TRUE(a.low != c.low || a.high != c.high);
}

TEST(BootstrapCi, NarrowerLevelNests) {
  std::mt19937_64 gen(10);
  auto s = synthetic_set(gen);
  while (s.trials.size() < 50) s = synthetic_set(gen);
  const auto wide = bootstrap_ci(s.trials, Statistic::Por, 4000, 0.95, 1);
  const auto narrow = bootstrap_ci(s.trials, Statistic::Por, 4000, 0.5, 1);
  EXPECT_LE(wide.low, narrow.low);
  EXPECT_GE(wide.high, narrow.high);
}

TEST(BootstrapCi, RejectsBadArguments) {
  const std::vector<TrialRecord> t{make_trial("q1", true, 0.5)};
  EXPECT_THROW(bootstrap_ci({}, Statistic::Por, 100, 0.95, 1), PreconditionError);
  EXPECT_THROW(bootstrap_ci(t, Statistic::Por, 0, 0.95, 1), PreconditionError);
  EXPECT_THROW(bootstrap_ci(t, Statistic::Por, 100, 1.0, 1), PreconditionError);
  EXPECT_THROW(bootstrap_ci(t, Statistic::Por, 100, 0.0, 1), PreconditionError);
}

TEST(GroupMetrics, CategorySharesAndSubgroupFigures) {
  const std::vector<TrialRecord> t{
      make_trial("q1", true, 0.8, "Health"),   make_trial("q2", false, 0.2, "Health"),
      make_trial("q3", true, 0.4, "Health"),   make_trial("q4", false, 0.6, "Law"),
  };
  const std::vector<TrialKey> failures{make_trial("q4", false, 1.0, "Law").key};
  const auto rows = group_metrics(t, GroupBy::Category, {500, 0.95, 42}, failures);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].key.category, "Health");
  EXPECT_FALSE(rows[0].key.model.has_value());
  EXPECT_EQ(rows[0].n, 3u);
  EXPECT_DOUBLE_EQ(rows[0].question_share, 0.75);
  EXPECT_DOUBLE_EQ(rows[1].question_share, 0.25);
  EXPECT_NEAR(rows[0].por, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(rows[0].cw_por, 1.2 / 1.4, 1e-12);
  EXPECT_DOUBLE_EQ(rows[1].cw_por, 0.0);
  EXPECT_EQ(rows[0].parse_failure_count, 0u);
  EXPECT_EQ(rows[1].parse_failure_count, 1u);
  for (const auto& r : rows) {
    EXPECT_LE(r.ci_low, r.cw_por);
    EXPECT_GE(r.ci_high, r.cw_por);
  }
}

TEST(GroupMetrics, SharesCountDistinctQuestions) {
  const std::vector<TrialRecord> t{
      make_trial("q1", true, 0.5, "Health", 30), make_trial("q1", false, 0.5, "Health", 60),
      make_trial("q2", false, 0.5, "Law", 30),   make_trial("q2", false, 0.5, "Law", 60),
      make_trial("q3", false, 0.5, "Law", 30),
  };
  const auto rows = group_metrics(t, GroupBy::Category, {100, 0.95, 1});
  EXPECT_NEAR(rows[0].question_share, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(rows[1].question_share, 2.0 / 3.0, 1e-12);
}

TEST(GroupMetrics, OrderingAndKeys) {
  const std::vector<TrialRecord> t{
      make_trial("q1", true, 0.5, "C", 90, "zeta", QuestionType::NonAdversarial),
      make_trial("q2", true, 0.5, "C", 30, "alpha", QuestionType::Adversarial),
      make_trial("q3", false, 0.5, "C", 60, "alpha", QuestionType::NonAdversarial),
  };
  const auto by_mv = group_metrics(t, GroupBy::ModelByVerbosity, {100, 0.95, 1});
  ASSERT_EQ(by_mv.size(), 3u);
  EXPECT_EQ(by_mv[0].key.model, "alpha");
  EXPECT_EQ(by_mv[0].key.verbosity, 30);
  EXPECT_EQ(by_mv[1].key.verbosity, 60);
  EXPECT_EQ(by_mv[2].key.model, "zeta");
  EXPECT_FALSE(by_mv[0].key.category.has_value());

  const auto overall = group_metrics(t, GroupBy::Overall, {100, 0.95, 1});
  ASSERT_EQ(overall.size(), 1u);
  EXPECT_EQ(overall[0].key, GroupKey{});
  EXPECT_DOUBLE_EQ(overall[0].question_share, 1.0);

  const auto by_type = group_metrics(t, GroupBy::ModelByType, {100, 0.95, 1});
  EXPECT_EQ(by_type.size(), 3u);
  EXPECT_TRUE(group_metrics({}, GroupBy::Category).empty());
}

TEST(ConfidenceTrends, MeansPerCell) {
  const std::vector<TrialRecord> t{
      make_trial("q1", false, 0.8 * 0.9, "C", 30, "m", QuestionType::Adversarial, 0.9),
      make_trial("q2", false, 0.6 * 0.7, "C", 30, "m", QuestionType::Adversarial, 0.7),
      make_trial("q3", true, 1.0 * 0.6, "C", 30, "m", QuestionType::Adversarial, 0.6),
      make_trial("q1", true, 0.4 * 0.5, "C", 60, "m", QuestionType::Adversarial, 0.5),
  };
  const auto rows = confidence_trends(t);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].verbosity, 30);
  EXPECT_EQ(rows[0].outcome, PickOutcome::Correct);
  EXPECT_EQ(rows[0].n, 2u);
  EXPECT_NEAR(rows[0].mean_llc, 0.8, 1e-12);
  EXPECT_NEAR(rows[0].mean_rubric_norm, 0.7, 1e-12);
  EXPECT_EQ(rows[1].outcome, PickOutcome::Override);
  EXPECT_NEAR(rows[1].mean_llc, 0.6, 1e-12);
  EXPECT_NEAR(rows[1].mean_rubric_norm, 1.0, 1e-12);
  EXPECT_EQ(rows[2].verbosity, 60);
  EXPECT_EQ(rows[2].outcome, PickOutcome::Override);
}

}  // namespace
}  // namespace cwpor
