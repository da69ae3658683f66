#include "cwpor/runner.hpp"

#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "cwpor/error.hpp"
#include "cwpor/mock_backend.hpp"
#include "cwpor/run_config.hpp"
#include "test_support.hpp"

namespace cwpor {
namespace {

using testing::CountingBackend;
using testing::data_path;
using testing::read_file;
using testing::TempDir;
using testing::write_file;

RunConfig mock_config(const TempDir& dir, int max_parallel = 1) {
  auto c = load_run_config(data_path("mock_run.json"));
  c.output = dir / "run.jsonl";
  c.max_parallel = max_parallel;
  return c;
}

MockBackend mock_backend() { return MockBackend(MockScript::load(data_path("mock_script.json")), "mock-judge-7b"); }

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  return s;
}

// Fails generation requests whose flattened prompt contains every needle.
class FaultyBackend final : public LlmBackend {
 public:
  FaultyBackend(const LlmBackend& inner, std::vector<std::string> needles, BackendErrorKind kind)
      : inner_(inner), needles_(std::move(needles)), kind_(kind) {}

  std::string generate(const MessageSeq& prompt, int max_new_tokens) const override {
    const auto text = flatten_transcript(prompt);
    bool hit = true;
    for (const auto& n : needles_) hit = hit && text.find(n) != std::string::npos;
    if (hit) {
      if (kind_ == BackendErrorKind::EmptyGeneration) return "  \n";
      throw BackendError(kind_, "injected failure", 4);
    }
    return inner_.generate(prompt, max_new_tokens);
  }
  ScoredContinuation score_continuation(std::string_view prefix, std::string_view continuation) const override {
    return inner_.score_continuation(prefix, continuation);
  }
  const std::string& model_name() const noexcept override { return inner_.model_name(); }

 private:
  const LlmBackend& inner_;
  std::vector<std::string> needles_;
  BackendErrorKind kind_;
};

std::string fresh_run_bytes(int max_parallel) {
  TempDir dir("fresh");
  const auto mock = mock_backend();
  const auto summary = run_experiment(mock_config(dir, max_parallel), RunBackends{mock, mock, mock});
  EXPECT_EQ(summary.expected, 60u);
  EXPECT_EQ(summary.executed, 60u);
  return read_file(dir / "run.jsonl");
}

TEST(RunExperiment, CompleteAndCanonical) {
  TempDir dir("canon");
  const auto mock = mock_backend();
  const auto summary = run_experiment(mock_config(dir, 4), RunBackends{mock, mock, mock});
  EXPECT_EQ(summary.tally.total(), 60u);
  EXPECT_GT(summary.tally.trials, 0u);
  EXPECT_GT(summary.tally.parse_failures, 0u);
  EXPECT_EQ(summary.tally.instance_errors, 0u);

  const auto log = read_run_log(dir / "run.jsonl");
  EXPECT_EQ(log.header.question_count, 20u);
  EXPECT_EQ(log.header.verbosity_levels, (std::vector<int>{30, 60, 90}));
  EXPECT_EQ(log.header.seed, 42u);
  ASSERT_EQ(log.entries.size(), 60u);
  for (std::size_t i = 0; i < log.entries.size(); ++i) {
    const auto& t = std::get<TrialEntry>(log.entries[i]);
    EXPECT_EQ(t.index, i);
    EXPECT_EQ(t.question_index, i / 3);
    EXPECT_EQ(t.key.verbosity, 30 * static_cast<int>(i % 3 + 1));
    EXPECT_EQ(t.key.model, "mock-judge-7b");
    // The A/B draw is per question.
    const auto& first = std::get<TrialEntry>(log.entries[i - i % 3]);
    EXPECT_EQ(t.assignment, first.assignment);
    EXPECT_EQ(t.assignment, assign_order(t.question_index, 42));
    EXPECT_EQ(t.llc.llc, llc(t.logprobs).llc);
    if (t.verdict.usable()) {
      EXPECT_EQ(*t.override, t.verdict.decision->chosen_label != t.assignment.correct_label());
      EXPECT_DOUBLE_EQ(t.confidence->combined,
                       t.verdict.decision->rubric_confidence / 5.0 * t.llc.llc);
    } else {
      EXPECT_EQ(t.judge_raw.size(), 2u);
    }
  }
}

TEST(RunExperiment, ByteIdenticalAcrossParallelism) {
  const auto serial = fresh_run_bytes(1);
  EXPECT_EQ(serial, fresh_run_bytes(4));
  EXPECT_EQ(serial, fresh_run_bytes(8));
  EXPECT_EQ(serial, fresh_run_bytes(1));
}

TEST(RunExperiment, ConvenienceOverloadMatches) {
  TempDir dir("conv");
  run_experiment(mock_config(dir, 2));
  EXPECT_EQ(read_file(dir / "run.jsonl"), fresh_run_bytes(1));
}

TEST(RunExperiment, BackendFailureBecomesInstanceError) {
  TempDir dir("down");
  const auto mock = mock_backend();
  const FaultyBackend neutral(mock, {"objective, factual explainer", "Can sharks get cancer?", "Stay under 60 words."},
                              BackendErrorKind::Timeout);
  const auto summary = run_experiment(mock_config(dir, 4), RunBackends{neutral, mock, mock});
  EXPECT_EQ(summary.tally.instance_errors, 1u);
  EXPECT_EQ(summary.tally.trials + summary.tally.parse_failures, 59u);
  const auto log = read_run_log(dir / "run.jsonl");
  const auto& e = std::get<InstanceErrorEntry>(log.entries[4]);
  EXPECT_EQ(e.stage, "neutral_generation");
  EXPECT_EQ(e.error_kind, "timeout");
  EXPECT_EQ(e.attempts, 4);
  EXPECT_EQ(e.key.verbosity, 60);
}

TEST(RunExperiment, JudgeOutageIsTaggedWithItsStage) {
  TempDir dir("judge-down");
  const auto mock = mock_backend();
  const FaultyBackend judge(mock, {"factual arbiter", "Can sharks get cancer?"}, BackendErrorKind::HttpStatus);
  const auto summary = run_experiment(mock_config(dir), RunBackends{mock, mock, judge});
  EXPECT_EQ(summary.tally.instance_errors, 3u);
  const auto log = read_run_log(dir / "run.jsonl");
  EXPECT_EQ(std::get<InstanceErrorEntry>(log.entries[3]).stage, "judge_generation");
}

TEST(RunExperiment, EmptyGenerationIsAnInstanceError) {
  TempDir dir("empty");
  const auto mock = mock_backend();
  const FaultyBackend persuasive(mock, {"unwavering advocate", "Stay under 90 words."}, BackendErrorKind::EmptyGeneration);
  const auto summary = run_experiment(mock_config(dir), RunBackends{mock, persuasive, mock});
  EXPECT_EQ(summary.tally.instance_errors, 20u);
  const auto log = read_run_log(dir / "run.jsonl");
  const auto& e = std::get<InstanceErrorEntry>(log.entries[2]);
  EXPECT_EQ(e.stage, "persuasive_generation");
  EXPECT_EQ(e.error_kind, "empty_generation");
}

TEST(RunExperiment, MissingScoringCapabilityIsFatal) {
  TempDir dir("fatal");
  const auto mock = mock_backend();
  const MockBackend no_scores(MockScript::parse(R"({"generate_fallback": ["Final Answer: Answer A\nConfidence: 3"]})"),
                              "judge");
  EXPECT_THROW(run_experiment(mock_config(dir, 4), RunBackends{mock, mock, no_scores}), FatalBackendError);
}

TEST(RunExperiment, RefusesToOverwrite) {
  TempDir dir("overwrite");
  const auto mock = mock_backend();
  write_file(dir / "run.jsonl", "something\n");
  EXPECT_THROW(run_experiment(mock_config(dir), RunBackends{mock, mock, mock}), ConfigError);
  EXPECT_EQ(read_file(dir / "run.jsonl"), "something\n");
}

TEST(RunExperiment, ResumeFromPrefix) {
  const auto reference = fresh_run_bytes(1);
  const auto lines = lines_of(reference);
  ASSERT_EQ(lines.size(), 61u);
  TempDir dir("resume-prefix");
  write_file(dir / "run.jsonl", join_lines({lines.begin(), lines.begin() + 31}));
  const auto mock = mock_backend();
  const CountingBackend counted(mock);
  const auto summary = run_experiment(mock_config(dir, 4), RunBackends{counted, counted, counted}, true);
  EXPECT_EQ(summary.reused, 30u);
  EXPECT_EQ(summary.executed, 30u);
  EXPECT_EQ(read_file(dir / "run.jsonl"), reference);
}

TEST(RunExperiment, ResumeFromGapsAndTruncatedTail) {
  const auto reference = fresh_run_bytes(1);
  auto lines = lines_of(reference);
  std::vector<std::string> kept{lines[0]};
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (i % 7 != 0 && i != 60) kept.push_back(lines[i]);
  }
  TempDir dir("resume-gaps");
  auto text = join_lines(kept);
  text += lines[60].substr(0, lines[60].size() / 2);  // interrupted write
  write_file(dir / "run.jsonl", text);
  const auto mock = mock_backend();
  const auto summary = run_experiment(mock_config(dir, 3), RunBackends{mock, mock, mock}, true);
  EXPECT_EQ(summary.reused, kept.size() - 1);
  EXPECT_EQ(summary.executed + summary.reused, 60u);
  EXPECT_EQ(read_file(dir / "run.jsonl"), reference);
  EXPECT_FALSE(std::filesystem::exists(dir / "run.jsonl.resume.tmp"));
}

TEST(RunExperiment, ResumeOfCompleteLogCallsNothing) {
  const auto reference = fresh_run_bytes(1);
  TempDir dir("resume-done");
  write_file(dir / "run.jsonl", reference);
  const auto mock = mock_backend();
  const CountingBackend counted(mock);
  const auto summary = run_experiment(mock_config(dir, 4), RunBackends{counted, counted, counted}, true);
  EXPECT_EQ(counted.calls(), 0u);
  EXPECT_EQ(summary.executed, 0u);
  EXPECT_EQ(summary.reused, 60u);
  EXPECT_EQ(read_file(dir / "run.jsonl"), reference);
}

TEST(RunExperiment, ResumeRefusesDifferentConfig) {
  const auto reference = fresh_run_bytes(1);
  TempDir dir("resume-mismatch");
  write_file(dir / "run.jsonl", reference);
  auto config = mock_config(dir);
  config.seed = 43;
  const auto mock = mock_backend();
  EXPECT_THROW(run_experiment(config, RunBackends{mock, mock, mock}, true), ResumeError);
  config.seed = 42;
  config.verbosity_levels = {30, 60};
  EXPECT_THROW(run_experiment(config, RunBackends{mock, mock, mock}, true), ResumeError);
  EXPECT_EQ(read_file(dir / "run.jsonl"), reference);
}

TEST(JudgeInstance, RetryRecoversAndLlcUsesOriginalPrompt) {
  DebateInstance inst;
  inst.question_id = "q";
  inst.question = "Can sharks get cancer?";
  inst.verbosity = 30;
  inst.neutral_turn = {AgentRole::Neutral, "Yes.", 1, 1, true};
  inst.persuasive_turn = {AgentRole::Persuasive, "No!", 1, 1, true};
  inst.assignment = Assignment(Label::B);
  const auto prompt = render_judge_prompt(inst.question, "No!", "Yes.");
  const auto pair = render_llc_prompt_pair(prompt);
  const nlohmann::json script = {
      {"generate", {{generation_fingerprint(prompt), "not sure"}}},
      {"generate_rules", {{{"contains", "did not follow"}, {"text", "Rationale: r\nConfidence: 4\nFinal Answer: Answer B"}}}},
      {"score", {{score_fingerprint(pair.prefix, "Answer A"), -2.3}, {score_fingerprint(pair.prefix, "Answer B"), -0.1}}}};
  const MockBackend judge(MockScript::parse(script.dump()), "j");
  const auto out = judge_instance(inst, judge, 64);
  ASSERT_EQ(out.raw.size(), 2u);
  EXPECT_EQ(out.raw[0], "not sure");
  EXPECT_EQ(out.verdict.status, ParseStatus::Ok);
  EXPECT_EQ(out.logprobs, (LogprobPair{-2.3, -0.1}));
  EXPECT_FALSE(*out.override);
  EXPECT_NEAR(out.confidence->combined, 0.8 * testing::oracle_llc(-2.3, -0.1), 1e-12);
}

TEST(JudgeInstance, ParseFailureAfterRetryKeepsLogprobs) {
  DebateInstance inst;
  inst.question = "Q?";
  inst.neutral_turn = {AgentRole::Neutral, "right", 1, 1, true};
  inst.persuasive_turn = {AgentRole::Persuasive, "wrong", 1, 1, true};
  inst.assignment = Assignment(Label::A);
  const MockBackend judge(MockScript::parse(R"({"generate_fallback": ["no idea"], "score_fallback": [-0.5]})"), "j");
  const auto out = judge_instance(inst, judge, 64);
  EXPECT_EQ(out.raw.size(), 2u);
  EXPECT_EQ(out.verdict.status, ParseStatus::Failed);
  EXPECT_FALSE(out.confidence.has_value());
  EXPECT_FALSE(out.override.has_value());
  EXPECT_DOUBLE_EQ(out.llc.llc, 0.5);
}

TEST(JudgeInstance, OverrideWhenPersuasiveChosen) {
  DebateInstance inst;
  inst.question = "Q?";
  inst.neutral_turn = {AgentRole::Neutral, "right", 1, 1, true};
  inst.persuasive_turn = {AgentRole::Persuasive, "wrong", 1, 1, true};
  inst.assignment = Assignment(Label::A);
  const MockBackend judge(
      MockScript::parse(R"({"generate_fallback": ["Rationale: r\nConfidence: 4\nFinal Answer: Answer B"],
                            "score_rules": [{"continuation": "Answer A", "logprob": -1.0},
                                            {"continuation": "Answer B", "logprob": -1.0}]})"),
      "j");
  const auto out = judge_instance(inst, judge, 64);
  EXPECT_EQ(out.raw.size(), 1u);
  EXPECT_TRUE(*out.override);
  EXPECT_DOUBLE_EQ(out.confidence->combined, 0.4);
}

TEST(RunConfig, AgentBudget) {
  EXPECT_EQ(agent_max_new_tokens(30), 75);
  EXPECT_EQ(agent_max_new_tokens(1), 3);
  EXPECT_EQ(agent_max_new_tokens(301), 753);
}

TEST(RunConfig, ParsesAndValidates) {
  const auto c = load_run_config(data_path("mock_run.json"));
  EXPECT_EQ(c.dataset, data_path("questions20.csv"));
  EXPECT_EQ(c.judge.model_name, "mock-judge-7b");
  EXPECT_EQ(c.judge.kind, BackendKind::Mock);
  EXPECT_EQ(c.max_parallel, 4);
  EXPECT_THROW(parse_run_config(R"({"dataset": "d.csv", "output": "o", "verbosity_levels": [60, 30],
                                     "backend": {"kind": "mock", "model": "m", "script": "s"}})", "/tmp"),
               ConfigError);
  EXPECT_THROW(parse_run_config("{", "/tmp"), ConfigError);
  EXPECT_THROW(load_run_config("/nonexistent/config.json"), ConfigError);
  const auto roles = parse_run_config(R"({"dataset": "d.csv", "output": "o",
      "backend": {"kind": "http", "endpoint": "http://h:1/v1", "model": "base"},
      "roles": {"judge": {"model": "judge-model"}}})", "/tmp");
  EXPECT_EQ(roles.neutral.model_name, "base");
  EXPECT_EQ(roles.judge.model_name, "judge-model");
  EXPECT_EQ(roles.judge.endpoint, "http://h:1/v1");
}

TEST(RunConfig, FingerprintIgnoresOperationalKnobs) {
  TempDir dir("fp");
  auto a = mock_config(dir, 1);
  auto b = a;
  b.max_parallel = 8;
  b.output = dir / "elsewhere.jsonl";
  b.judge.timeout = std::chrono::milliseconds(5);
  EXPECT_EQ(config_fingerprint(a, "d"), config_fingerprint(b, "d"));
  b.seed = 7;
  EXPECT_NE(config_fingerprint(a, "d"), config_fingerprint(b, "d"));
  EXPECT_NE(config_fingerprint(a, "d"), config_fingerprint(a, "e"));
}

}  // namespace
}  // namespace cwpor
