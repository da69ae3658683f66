#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "cwpor/llm_backend.hpp"
#include "cwpor/metrics.hpp"

namespace cwpor::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(CWPOR_TEST_DATA_DIR) / name;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("cwpor-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Brute-force evaluation of the override rates straight from their
// definitions, in long double over plain arrays. Shares no code with the
// metrics module.
inline double oracle_por(const std::vector<bool>& overrides) {
  long double hits = 0;
  for (const bool o : overrides) hits += o ? 1.0L : 0.0L;
  return static_cast<double>(hits / static_cast<long double>(overrides.size()));
}

inline double oracle_cw_por(const std::vector<bool>& overrides, const std::vector<double>& confidences) {
  long double num = 0;
  long double den = 0;
  for (std::size_t i = 0; i < overrides.size(); ++i) {
    num += (overrides[i] ? 1.0L : 0.0L) * static_cast<long double>(confidences[i]);
    den += static_cast<long double>(confidences[i]);
  }
  return static_cast<double>(num / den);
}

// Closed-form two-way softmax maximum, 1 / (1 + e^{-|a-b|}).
inline double oracle_llc(double a, double b) { return 1.0 / (1.0 + std::exp(-std::fabs(a - b))); }

inline TrialRecord make_trial(std::string question_id, bool override, double combined,
                              std::string category = "Misconceptions", int verbosity = 30,
                              std::string model = "m", QuestionType qtype = QuestionType::Adversarial,
                              double llc = 1.0) {
  TrialRecord t;
  t.key = {std::move(question_id), std::move(category), qtype, verbosity, std::move(model)};
  t.override = override;
  t.confidence = {combined / llc, llc, combined};
  return t;
}

// Random synthetic trial set: size in [1, 200], overrides fair coins,
// confidences uniform in (0, 1].
struct SyntheticSet {
  std::vector<TrialRecord> trials;
  std::vector<bool> overrides;
  std::vector<double> confidences;
};

inline SyntheticSet synthetic_set(std::mt19937_64& gen, bool equal_confidence = false) {
  std::uniform_int_distribution<int> size(1, 200);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  SyntheticSet s;
  const int n = size(gen);
  double shared = 1.0 - conf(gen);  // (0, 1]
  for (int i = 0; i < n; ++i) {
    const bool o = coin(gen);
    const double c = equal_confidence ? shared : 1.0 - conf(gen);
    s.overrides.push_back(o);
    s.confidences.push_back(c);
    s.trials.push_back(make_trial("q" + std::to_string(i), o, c));
  }
  return s;
}

// Wraps a backend and counts calls.
class CountingBackend final : public LlmBackend {
 public:
  explicit CountingBackend(const LlmBackend& inner) : inner_(inner) {}

  std::string generate(const MessageSeq& prompt, int max_new_tokens) const override {
    ++generate_calls;
    return inner_.generate(prompt, max_new_tokens);
  }
  ScoredContinuation score_continuation(std::string_view prefix, std::string_view continuation) const override {
    ++score_calls;
    return inner_.score_continuation(prefix, continuation);
  }
  const std::string& model_name() const noexcept override { return inner_.model_name(); }

  std::size_t calls() const { return generate_calls + score_calls; }

  mutable std::atomic<std::size_t> generate_calls{0};
  mutable std::atomic<std::size_t> score_calls{0};

 private:
  const LlmBackend& inner_;
};

}  // namespace cwpor::testing
