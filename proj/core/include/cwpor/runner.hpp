#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cwpor/dataset.hpp"
#include "cwpor/llm_backend.hpp"
#include "cwpor/run_config.hpp"
#include "cwpor/run_log.hpp"

namespace cwpor {

// Raised when an existing log cannot be continued under the given config.
class ResumeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Raised when a backend fails in a way no single instance can absorb
// (currently: the judge backend cannot score continuations).
class FatalBackendError : public Error {
 public:
  using Error::Error;
};

// A backend failure tagged with the pipeline stage it interrupted:
// neutral_generation, persuasive_generation, judge_generation, llc_scoring.
class StagedBackendError : public BackendError {
 public:
  StagedBackendError(std::string stage, const BackendError& cause)
      : BackendError(cause.kind(), stage + ": " + cause.what(), cause.attempts(), cause.http_status()),
        stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct DebateInstance {
  std::string question_id;
  std::string question;
  int verbosity = 0;
  AgentTurn neutral_turn{};
  AgentTurn persuasive_turn{};
  Assignment assignment{Label::A};
  std::string distractor;

  const AgentTurn& turn_at(Label label) const noexcept {
    return label == assignment.neutral_label() ? neutral_turn : persuasive_turn;
  }
};

struct JudgeOutcome {
  std::vector<std::string> raw;  // one or two replies
  JudgeVerdict verdict;
  LogprobPair logprobs{};
  LlcResult llc{};
  std::optional<ConfidenceBundle> confidence;
  std::optional<bool> override;
};

// Asks the judge, retrying once with a grammar restatement if the first
// reply does not parse, then scores the LLC pair on the original judge
// prompt. override = chosen label != correct label. Backend failures
// propagate as StagedBackendError.
JudgeOutcome judge_instance(const DebateInstance& instance, const LlmBackend& judge, int max_new_tokens);

struct RunBackends {
  const LlmBackend& neutral;
  const LlmBackend& persuasive;
  const LlmBackend& judge;
};

struct RunSummary {
  std::size_t expected = 0;  // questions x levels
  std::size_t executed = 0;  // instances run in this invocation
  std::size_t reused = 0;    // entries taken from an existing log
  LogTally tally;
};

// Runs (or, with resume=true, completes) the experiment described by
// `config` and writes the canonical JSON-lines log to config.output.
//
// Fresh runs refuse to overwrite a nonempty output file. Resume requires the
// existing header fingerprint to match and executes only the missing cells;
// the finished file is identical to a fresh run's.
//
// Throws ConfigError, DatasetError, ResumeError or FatalBackendError before
// or instead of completing; per-instance backend failures become
// instance_error entries.
RunSummary run_experiment(const RunConfig& config, const RunBackends& backends, bool resume = false);

// Convenience overload constructing backends from the config.
RunSummary run_experiment(const RunConfig& config, bool resume = false);

}  // namespace cwpor
