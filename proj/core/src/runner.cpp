#include "cwpor/runner.hpp"

#include <atomic>
#include <condition_variable>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "cwpor/confidence.hpp"
#include "cwpor/digest.hpp"
#include "cwpor/prompt_kit.hpp"

namespace cwpor {
namespace {

template <typename F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StagedBackendError&) {
    throw;
  } catch (const BackendError& e) {
    throw StagedBackendError(stage, e);
  }
}

class Experiment {
 public:
  Experiment(const RunConfig& config, const RunBackends& backends, std::vector<QuestionRecord> questions,
             LogHeader header)
      : config_(config), backends_(backends), questions_(std::move(questions)), header_(std::move(header)) {}

  std::size_t size() const noexcept { return questions_.size() * config_.verbosity_levels.size(); }

  std::string execute(std::size_t index) const {
    const auto levels = config_.verbosity_levels.size();
    const auto qi = index / levels;
    const auto& q = questions_[qi];
    const int v = config_.verbosity_levels[index % levels];
    const TrialKey key{q.id, q.category, q.qtype, v, backends_.judge.model_name()};
    try {
      return serialize_entry(run_trial(index, qi, q, key), header_);
    } catch (const StagedBackendError& e) {
      if (e.kind() == BackendErrorKind::Capability) throw FatalBackendError(e.what());
      return serialize_entry(
          InstanceErrorEntry{index, qi, key, e.stage(), std::string(to_string(e.kind())), e.what(), e.attempts()},
          header_);
    }
  }

 private:
  TrialEntry run_trial(std::size_t index, std::size_t qi, const QuestionRecord& q, const TrialKey& key) const {
    const VerbosityLimit limit(key.verbosity);
    const int budget = agent_max_new_tokens(key.verbosity);
    const auto& distractor = select_distractor(q, config_.distractor_policy, config_.seed);

    const auto neutral_text = in_stage("neutral_generation", [&] {
      return backends_.neutral.generate(render_neutral_prompt(q.question, q.best_answer, limit), budget);
    });
    const auto persuasive_text = in_stage("persuasive_generation", [&] {
      return backends_.persuasive.generate(render_persuasive_prompt(q.question, distractor, limit), budget);
    });

    DebateInstance instance;
    instance.question_id = q.id;
    instance.question = q.question;
    instance.verbosity = key.verbosity;
    instance.neutral_turn = make_agent_turn(AgentRole::Neutral, neutral_text, limit, config_.limit_policy);
    instance.persuasive_turn = make_agent_turn(AgentRole::Persuasive, persuasive_text, limit, config_.limit_policy);
    // One A/B draw per question, shared by all verbosity levels.
    instance.assignment = assign_order(qi, config_.seed);
    instance.distractor = distractor;

    for (const auto* turn : {&instance.neutral_turn, &instance.persuasive_turn}) {
      if (turn->word_count == 0) {
        throw StagedBackendError(std::string(to_string(turn->role)) + "_generation",
                                 BackendError(BackendErrorKind::EmptyGeneration, "agent produced no text"));
      }
    }

    auto outcome = judge_instance(instance, backends_.judge, config_.judge_max_tokens);

    TrialEntry t;
    t.index = index;
    t.question_index = qi;
    t.key = key;
    t.question = q.question;
    t.distractor = distractor;
    t.assignment = instance.assignment;
    t.neutral_turn = std::move(instance.neutral_turn);
    t.persuasive_turn = std::move(instance.persuasive_turn);
    t.judge_raw = std::move(outcome.raw);
    t.verdict = std::move(outcome.verdict);
    t.logprobs = outcome.logprobs;
    t.llc = outcome.llc;
    t.confidence = outcome.confidence;
    t.override = outcome.override;
    return t;
  }

  const RunConfig& config_;
  const RunBackends& backends_;
  std::vector<QuestionRecord> questions_;
  LogHeader header_;
};

// Executes `todo` on up to max_parallel workers and hands finished lines to
// `write` strictly in ascending index order, from the calling thread only.
template <typename Write>
void execute_ordered(const Experiment& experiment, const std::vector<std::size_t>& todo, int max_parallel,
                     Write&& write) {
  if (todo.empty()) return;
  std::vector<std::optional<std::string>> done(todo.size());
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(max_parallel), todo.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (!stop) {
          const auto slot = next.fetch_add(1);
          if (slot >= todo.size()) break;
          try {
            auto line = experiment.execute(todo[slot]);
            std::lock_guard lock(mu);
            done[slot] = std::move(line);
          } catch (...) {
            std::lock_guard lock(mu);
            if (!failure) failure = std::current_exception();
            stop = true;
          }
          cv.notify_all();
        }
      });
    }

    for (std::size_t slot = 0; slot < todo.size(); ++slot) {
      std::string line;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return done[slot].has_value() || failure; });
        if (!done[slot]) break;
        line = std::move(*done[slot]);
        done[slot].reset();
      }
      write(todo[slot], line);
    }
    stop = true;
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::size_t> missing_indices(std::size_t total, const std::set<std::size_t>& present) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < total; ++i) {
    if (!present.contains(i)) out.push_back(i);
  }
  return out;
}

}  // namespace

JudgeOutcome judge_instance(const DebateInstance& instance, const LlmBackend& judge, int max_new_tokens) {
  const auto& answer_a = instance.turn_at(Label::A).text;
  const auto& answer_b = instance.turn_at(Label::B).text;
  const auto prompt = render_judge_prompt(instance.question, answer_a, answer_b);

  JudgeOutcome out;
  out.raw.push_back(in_stage("judge_generation", [&] { return judge.generate(prompt, max_new_tokens); }));
  out.verdict = parse_verdict(out.raw.back());
  if (!out.verdict.usable()) {
    const auto retry = render_judge_retry_prompt(prompt, out.raw.back());
    out.raw.push_back(in_stage("judge_generation", [&] { return judge.generate(retry, max_new_tokens); }));
    out.verdict = parse_verdict(out.raw.back());
  }

  const auto pair = render_llc_prompt_pair(prompt);
  out.logprobs = in_stage("llc_scoring", [&] {
    return LogprobPair{judge.score_continuation(pair.prefix, pair.continuation_a).total_logprob,
                       judge.score_continuation(pair.prefix, pair.continuation_b).total_logprob};
  });
  try {
    out.llc = llc(out.logprobs);
  } catch (const PreconditionError& e) {
    throw StagedBackendError("llc_scoring", BackendError(BackendErrorKind::MalformedResponse, e.what()));
  }

  if (out.verdict.decision) {
    out.confidence = make_bundle(out.verdict.decision->rubric_confidence, out.logprobs);
    out.override = out.verdict.decision->chosen_label != instance.assignment.correct_label();
  }
  return out;
}

RunSummary run_experiment(const RunConfig& config, const RunBackends& backends, bool resume) {
  config.validate();
  const auto format = config.resolved_dataset_format();
  auto questions = load_dataset(config.dataset, format);
  if (questions.empty()) throw DatasetError(config.dataset.string() + ": dataset has no questions");
  std::string digest;
  try {
    digest = sha256_file_hex(config.dataset);
  } catch (const Error& e) {
    throw DatasetError(e.what());
  }

  LogHeader header;
  header.template_version = std::string(kTemplateVersion);
  header.config_fingerprint = config_fingerprint(config, digest);
  header.seed = config.seed;
  header.question_count = questions.size();
  header.verbosity_levels = config.verbosity_levels;
  header.dataset_sha256 = digest;
  header.models = {{"neutral", backends.neutral.model_name()},
                   {"persuasive", backends.persuasive.model_name()},
                   {"judge", backends.judge.model_name()}};

  const Experiment experiment(config, backends, std::move(questions), header);
  RunSummary summary;
  summary.expected = experiment.size();

  namespace fs = std::filesystem;
  const bool exists = fs::exists(config.output) && fs::file_size(config.output) > 0;
  if (exists && !resume) {
    throw ConfigError("output " + config.output.string() + " already exists; pass --resume to continue it");
  }
  if (config.output.has_parent_path()) fs::create_directories(config.output.parent_path());

  std::map<std::size_t, std::string> existing;
  bool prefix_append = false;
  if (exists) {
    const auto log = read_run_log(config.output);
    if (log.header.config_fingerprint != header.config_fingerprint) {
      throw ResumeError("existing log " + config.output.string() +
                        " was produced by a different configuration (fingerprint mismatch)");
    }
    if (log.header != header) throw ResumeError("existing log header does not match this run");
    for (std::size_t i = 0; i < log.entries.size(); ++i) {
      const auto idx = entry_index(log.entries[i]);
      if (idx >= summary.expected) throw ResumeError("existing log has an out-of-range entry index");
      if (!existing.emplace(idx, log.lines[i]).second) throw ResumeError("existing log repeats an entry index");
    }
    prefix_append = !log.truncated_tail && (existing.empty() || existing.rbegin()->first + 1 == existing.size());
    if (prefix_append) {
      std::size_t expect = 0;
      for (const auto& [idx, _] : existing) prefix_append = prefix_append && idx == expect++;
    }
  }

  std::set<std::size_t> present;
  for (const auto& [idx, _] : existing) present.insert(idx);
  const auto todo = missing_indices(summary.expected, present);
  summary.reused = existing.size();
  summary.executed = todo.size();

  auto write_line = [](std::ofstream& out, const std::string& line) {
    out << line << '\n';
    out.flush();
    if (!out) throw Error("write failure on run log");
  };

  if (!exists || prefix_append) {
    std::ofstream out(config.output, exists ? std::ios::binary | std::ios::app : std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output " + config.output.string());
    if (!exists) write_line(out, serialize_header(header));
    execute_ordered(experiment, todo, config.max_parallel, [&](std::size_t, const std::string& line) {
      write_line(out, line);
    });
  } else {
    // Gaps in the middle: rebuild the file in canonical order beside the
    // original and swap it in once complete.
    auto tmp = config.output;
    tmp += ".resume.tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw ConfigError("cannot open " + tmp.string());
      write_line(out, serialize_header(header));
      auto it = existing.begin();
      try {
        execute_ordered(experiment, todo, config.max_parallel, [&](std::size_t idx, const std::string& line) {
          for (; it != existing.end() && it->first < idx; ++it) write_line(out, it->second);
          write_line(out, line);
        });
      } catch (...) {
        out.close();
        fs::remove(tmp);
        throw;
      }
      for (; it != existing.end(); ++it) write_line(out, it->second);
    }
    fs::rename(tmp, config.output);
  }

  summary.tally = tally(read_run_log(config.output));
  return summary;
}

RunSummary run_experiment(const RunConfig& config, bool resume) {
  config.validate();
  std::unique_ptr<LlmBackend> neutral;
  std::unique_ptr<LlmBackend> persuasive;
  std::unique_ptr<LlmBackend> judge;
  try {
    neutral = make_backend(config.neutral);
    persuasive = make_backend(config.persuasive);
    judge = make_backend(config.judge);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return run_experiment(config, RunBackends{*neutral, *persuasive, *judge}, resume);
}

}  // namespace cwpor
