#include "cwpor/http_backend.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace cwpor {
namespace {

using nlohmann::json;

// Length in code points of a UTF-8 string (continuation bytes not counted).
std::size_t code_points(std::string_view s) {
  std::size_t n = 0;
  for (const char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

json sampling_fields(const BackendConfig& config) {
  json j = json::object();
  if (config.deterministic) j["temperature"] = 0;
  return j;
}

[[noreturn]] void malformed(const std::string& what) {
  throw BackendError(BackendErrorKind::MalformedResponse, "malformed response: " + what);
}

json parse_body(std::string_view body) {
  try {
    return json::parse(body);
  } catch (const json::parse_error&) {
    malformed("body is not JSON");
  }
}

std::string truncated(std::string_view s, std::size_t n = 200) {
  return s.size() <= n ? std::string(s) : std::string(s.substr(0, n)) + "...";
}

}  // namespace

Endpoint parse_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw ConfigError("endpoint must start with http:// or https://");
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("unsupported endpoint scheme '" + std::string(scheme) + "'");
  const auto rest = url.substr(scheme_end + 3);
  const auto slash = rest.find('/');
  const auto host = rest.substr(0, slash);
  if (host.empty()) throw ConfigError("endpoint has no host");
  Endpoint ep;
  ep.origin = std::string(url.substr(0, scheme_end + 3 + host.size()));
  if (slash != std::string_view::npos) {
    ep.base_path = std::string(rest.substr(slash));
    while (!ep.base_path.empty() && ep.base_path.back() == '/') ep.base_path.pop_back();
  }
  return ep;
}

std::string build_chat_request_body(const BackendConfig& config, const MessageSeq& prompt, int max_new_tokens) {
  json messages = json::array();
  for (const auto& m : prompt) messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  json body = sampling_fields(config);
  body["model"] = config.model_name;
  body["messages"] = std::move(messages);
  body["max_tokens"] = max_new_tokens;
  body["stream"] = false;
  return body.dump();
}

std::string build_score_request_body(const BackendConfig& config, std::string_view prefix,
                                     std::string_view continuation) {
  json body = sampling_fields(config);
  body["model"] = config.model_name;
  body["prompt"] = std::string(prefix) + std::string(continuation);
  body["echo"] = true;
  body["logprobs"] = 1;
  body["max_tokens"] = 1;
  body["stream"] = false;
  return body.dump();
}

std::string parse_chat_response(std::string_view body) {
  const auto doc = parse_body(body);
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
    malformed("missing choices");
  }
  const auto& choice = doc["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
    malformed("missing choices[0].message");
  }
  const auto& content = choice["message"]["content"];
  if (!content.is_string()) malformed("choices[0].message.content is not a string");
  return content.get<std::string>();
}

double sum_continuation_logprobs(std::string_view body, std::string_view prefix, std::string_view continuation) {
  const auto doc = parse_body(body);
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
    malformed("missing choices");
  }
  const auto& choice = doc["choices"][0];
  const auto lp = choice.find("logprobs");
  if (lp == choice.end() || !lp->is_object()) {
    throw BackendError(BackendErrorKind::Capability, "backend returned no logprobs for the echoed prompt");
  }
  const auto tokens = lp->find("token_logprobs");
  const auto offsets = lp->find("text_offset");
  if (tokens == lp->end() || offsets == lp->end() || !tokens->is_array() || !offsets->is_array()) {
    throw BackendError(BackendErrorKind::Capability, "backend response lacks token_logprobs/text_offset");
  }
  if (tokens->size() != offsets->size()) malformed("token_logprobs and text_offset differ in length");

  const auto begin = code_points(prefix);
  const auto end = begin + code_points(continuation);
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < offsets->size(); ++i) {
    if (!(*offsets)[i].is_number_integer()) malformed("non-integer text_offset");
    const auto start = (*offsets)[i].get<std::size_t>();
    const auto stop = i + 1 < offsets->size() ? (*offsets)[i + 1].get<std::size_t>() : end;
    if (stop <= begin && start < begin) continue;  // fully inside the prefix
    if (start >= end) break;                       // past the continuation
    const auto& value = (*tokens)[i];
    if (!value.is_number()) malformed("missing logprob for a continuation token");
    total += value.get<double>();
    ++counted;
  }
  if (counted == 0) {
    throw BackendError(BackendErrorKind::Capability, "echoed tokens do not cover the continuation");
  }
  if (!std::isfinite(total)) malformed("non-finite log-probability");
  return total;
}

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)), endpoint_(parse_endpoint(config_.endpoint)) {}

std::string HttpBackend::post(const std::string& path, const std::string& body) const {
  const int attempts_allowed = 1 + std::max(0, config_.max_retries);
  auto backoff = config_.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      // A fresh client per attempt: request construction has no state that a
      // retry could duplicate.
      httplib::Client client(endpoint_.origin);
      client.set_connection_timeout(config_.timeout);
      client.set_read_timeout(config_.timeout);
      client.set_write_timeout(config_.timeout);
      if (const char* token = std::getenv(config_.api_key_env.c_str()); token && *token) {
        client.set_bearer_token_auth(token);
      }
      auto res = client.Post(endpoint_.base_path + path, body, "application/json");
      if (!res) {
        const auto err = res.error();
        const bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
        throw BackendError(timed_out ? BackendErrorKind::Timeout : BackendErrorKind::Transport,
                           "POST " + endpoint_.origin + endpoint_.base_path + path + ": " + httplib::to_string(err),
                           attempt);
      }
      if (res->status < 200 || res->status >= 300) {
        throw BackendError(BackendErrorKind::HttpStatus,
                           "POST " + endpoint_.base_path + path + " returned HTTP " + std::to_string(res->status) +
                               ": " + truncated(res->body),
                           attempt, res->status);
      }
      return res->body;
    } catch (const BackendError& e) {
      if (!e.retryable() || attempt >= attempts_allowed) {
        throw BackendError(e.kind(), e.what(), attempt, e.http_status());
      }
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

std::string HttpBackend::generate(const MessageSeq& prompt, int max_new_tokens) const {
  if (max_new_tokens < 1) throw PreconditionError("generate: max_new_tokens must be >= 1");
  return parse_chat_response(post("/chat/completions", build_chat_request_body(config_, prompt, max_new_tokens)));
}

ScoredContinuation HttpBackend::score_continuation(std::string_view prefix, std::string_view continuation) const {
  if (continuation.empty()) throw PreconditionError("score_continuation: continuation must be nonempty");
  const auto body = post("/completions", build_score_request_body(config_, prefix, continuation));
  return {std::string(continuation), sum_continuation_logprobs(body, prefix, continuation)};
}

}  // namespace cwpor
