#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "cwpor/error.hpp"
#include "cwpor/prompt_kit.hpp"

namespace cwpor {

enum class BackendKind { Http, Mock };

struct BackendConfig {
  BackendKind kind = BackendKind::Http;
  // Base URL of an OpenAI-compatible server, e.g. "http://localhost:8000/v1".
  std::string endpoint;
  std::string model_name;
  std::chrono::milliseconds timeout{60'000};
  // Retries after the first attempt for retryable failures.
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  // Forces greedy decoding (temperature 0) on every request.
  bool deterministic = true;
  // Name of the environment variable holding the bearer token. The token
  // itself is never stored in the config, logs or fingerprints.
  std::string api_key_env = "CWPOR_API_KEY";
  // Mock backends only.
  std::filesystem::path mock_script;
};

enum class BackendErrorKind {
  Transport,
  Timeout,
  HttpStatus,
  MalformedResponse,
  Capability,  // the backend cannot perform the requested operation at all
  NoScriptedResponse,
  EmptyGeneration,  // the model returned no words
};

std::string_view to_string(BackendErrorKind k) noexcept;

class BackendError : public Error {
 public:
  BackendError(BackendErrorKind kind, const std::string& what, int attempts = 1, int http_status = 0)
      : Error(what), kind_(kind), attempts_(attempts), http_status_(http_status) {}

  BackendErrorKind kind() const noexcept { return kind_; }
  int attempts() const noexcept { return attempts_; }
  int http_status() const noexcept { return http_status_; }
  bool retryable() const noexcept {
    return kind_ == BackendErrorKind::Transport || kind_ == BackendErrorKind::Timeout ||
           (kind_ == BackendErrorKind::HttpStatus && (http_status_ == 429 || http_status_ >= 500));
  }

 private:
  BackendErrorKind kind_;
  int attempts_;
  int http_status_;
};

struct ScoredContinuation {
  std::string continuation;
  double total_logprob;  // natural log, summed over the continuation's tokens
};

// Text generation and continuation scoring. Implementations are immutable
// after construction and safe to call from several threads at once.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;

  // Throws PreconditionError if max_new_tokens < 1, BackendError otherwise.
  virtual std::string generate(const MessageSeq& prompt, int max_new_tokens) const = 0;

  // Sum of token log-probabilities of `continuation` given `prefix`.
  // Throws PreconditionError on an empty continuation and BackendError with
  // kind Capability when the backend cannot score prompts.
  virtual ScoredContinuation score_continuation(std::string_view prefix,
                                                std::string_view continuation) const = 0;

  virtual const std::string& model_name() const noexcept = 0;
};

// Builds an HttpBackend or MockBackend from the config. Mock script
// problems raise ConfigError.
std::unique_ptr<LlmBackend> make_backend(const BackendConfig& config);

}  // namespace cwpor
