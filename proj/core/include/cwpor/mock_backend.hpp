#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cwpor/llm_backend.hpp"

namespace cwpor {

// Stable request fingerprints used as script keys.
//   generation: sha256(flatten_transcript(prompt))
//   scoring:    sha256(prefix + '\x1f' + continuation)
std::string generation_fingerprint(const MessageSeq& prompt);
std::string score_fingerprint(std::string_view prefix, std::string_view continuation);

// Scripted responses. Lookup order for every request: exact fingerprint,
// then the first matching rule, then the fallback list indexed by the
// fingerprint. Nothing is mutated on lookup, so responses are a pure
// function of (script, request).
//
// JSON layout (every section optional):
// {
//   "generate": { "<fingerprint>": "text" },
//   "generate_rules": [ { "contains": "s" | ["s", ...],
//                         "text": "..." | "choices": ["...", ...] | "error": "<kind>" } ],
//   "generate_fallback": [ "...", ... ],
//   "score": { "<fingerprint>": -0.1 },
//   "score_rules": [ { "continuation": "Answer A", "prefix_contains": "s" | [...],
//                      "logprob": -0.1 | "choices": [...] | "error": "<kind>" } ],
//   "score_fallback": [ -0.1, -2.3 ]
// }
// "<kind>" is one of transport, timeout, http_status, malformed. A script
// with no score sections reports a Capability error on scoring.
struct MockScript {
  template <typename T>
  struct Rule {
    std::vector<std::string> contains;      // all must occur in the request text
    std::optional<std::string> continuation;  // scoring rules only
    std::variant<T, std::vector<T>, BackendErrorKind> response;
  };

  std::map<std::string, std::string, std::less<>> generate;
  std::vector<Rule<std::string>> generate_rules;
  std::vector<std::string> generate_fallback;
  std::map<std::string, double, std::less<>> score;
  std::vector<Rule<double>> score_rules;
  std::vector<double> score_fallback;

  bool can_score() const noexcept {
    return !score.empty() || !score_rules.empty() || !score_fallback.empty();
  }

  // Throws ConfigError on malformed scripts.
  static MockScript parse(std::string_view json_text);
  static MockScript load(const std::filesystem::path& path);
};

class MockBackend final : public LlmBackend {
 public:
  MockBackend(MockScript script, std::string model_name);

  std::string generate(const MessageSeq& prompt, int max_new_tokens) const override;
  ScoredContinuation score_continuation(std::string_view prefix, std::string_view continuation) const override;
  const std::string& model_name() const noexcept override { return model_name_; }

 private:
  MockScript script_;
  std::string model_name_;
};

}  // namespace cwpor
