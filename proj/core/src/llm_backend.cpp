#include "cwpor/llm_backend.hpp"

#include "cwpor/http_backend.hpp"
#include "cwpor/mock_backend.hpp"

namespace cwpor {

std::string_view to_string(BackendErrorKind k) noexcept {
  switch (k) {
    case BackendErrorKind::Transport: return "transport";
    case BackendErrorKind::Timeout: return "timeout";
    case BackendErrorKind::HttpStatus: return "http_status";
    case BackendErrorKind::MalformedResponse: return "malformed";
    case BackendErrorKind::Capability: return "capability";
    case BackendErrorKind::NoScriptedResponse: return "no_scripted_response";
    case BackendErrorKind::EmptyGeneration: return "empty_generation";
  }
  return "transport";
}

std::unique_ptr<LlmBackend> make_backend(const BackendConfig& config) {
  if (config.kind == BackendKind::Mock) {
    return std::make_unique<MockBackend>(MockScript::load(config.mock_script), config.model_name);
  }
  return std::make_unique<HttpBackend>(config);
}

}  // namespace cwpor
