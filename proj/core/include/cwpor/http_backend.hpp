#pragma once

#include <string>
#include <string_view>

#include "cwpor/llm_backend.hpp"

namespace cwpor {

struct Endpoint {
  std::string origin;     // scheme://host[:port]
  std::string base_path;  // "" or "/v1" style prefix without trailing slash
};

// Throws ConfigError for anything that is not http(s)://host[:port][/path].
Endpoint parse_endpoint(std::string_view url);

// Request/response shapes for an OpenAI-compatible server.
//
//   POST {base}/chat/completions
//     {"model", "messages": [{"role", "content"}], "max_tokens", "stream": false,
//      "temperature": 0 (deterministic only)}
//     -> choices[0].message.content
//
//   POST {base}/completions
//     {"model", "prompt": prefix + continuation, "echo": true, "logprobs": 1,
//      "max_tokens": 1, "stream": false, "temperature": 0 (deterministic only)}
//     -> choices[0].logprobs.{tokens, token_logprobs, text_offset}
//
// text_offset is read in Unicode code points, matching OpenAI and vLLM.
std::string build_chat_request_body(const BackendConfig& config, const MessageSeq& prompt, int max_new_tokens);
std::string build_score_request_body(const BackendConfig& config, std::string_view prefix,
                                     std::string_view continuation);

// Throws BackendError(MalformedResponse) on unexpected shapes.
std::string parse_chat_response(std::string_view body);

// Sums token_logprobs over every echoed token whose span overlaps the
// continuation. A token straddling the prefix/continuation boundary is
// included. Throws BackendError(Capability) when the response lacks
// echoed prompt logprobs and BackendError(MalformedResponse) on other
// shape errors.
double sum_continuation_logprobs(std::string_view body, std::string_view prefix, std::string_view continuation);

class HttpBackend final : public LlmBackend {
 public:
  explicit HttpBackend(BackendConfig config);

  std::string generate(const MessageSeq& prompt, int max_new_tokens) const override;
  ScoredContinuation score_continuation(std::string_view prefix, std::string_view continuation) const override;
  const std::string& model_name() const noexcept override { return config_.model_name; }

 private:
  std::string post(const std::string& path, const std::string& body) const;

  BackendConfig config_;
  Endpoint endpoint_;
};

}  // namespace cwpor
