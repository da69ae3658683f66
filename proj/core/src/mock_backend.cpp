#include "cwpor/mock_backend.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include "cwpor/digest.hpp"
#include "json.hpp"

namespace cwpor {
namespace {

using nlohmann::json;

[[noreturn]] void script_error(const std::string& what) { throw ConfigError("mock script: " + what); }

BackendErrorKind parse_error_kind(const std::string& s) {
  if (s == "transport") return BackendErrorKind::Transport;
  if (s == "timeout") return BackendErrorKind::Timeout;
  if (s == "http_status") return BackendErrorKind::HttpStatus;
  if (s == "malformed") return BackendErrorKind::MalformedResponse;
  script_error("unknown error kind '" + s + "'");
}

std::vector<std::string> string_or_list(const json& j, const std::string& field) {
  if (j.is_string()) return {j.get<std::string>()};
  if (!j.is_array()) script_error(field + " must be a string or array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) script_error(field + " must be a string or array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

template <typename T>
T scalar(const json& j, const std::string& field) {
  if constexpr (std::is_same_v<T, std::string>) {
    if (!j.is_string()) script_error(field + " must be a string");
  } else {
    if (!j.is_number() || !std::isfinite(j.get<double>())) script_error(field + " must be a finite number");
  }
  return j.get<T>();
}

template <typename T>
std::vector<T> list_of(const json& j, const std::string& field) {
  if (!j.is_array()) script_error(field + " must be an array");
  std::vector<T> out;
  for (const auto& v : j) out.push_back(scalar<T>(v, field));
  return out;
}

template <typename T>
MockScript::Rule<T> parse_rule(const json& j, const std::string& field, const char* value_key) {
  if (!j.is_object()) script_error(field + " entries must be objects");
  MockScript::Rule<T> rule;
  const char* contains_key = std::is_same_v<T, std::string> ? "contains" : "prefix_contains";
  if (j.contains(contains_key)) rule.contains = string_or_list(j[contains_key], field + "." + contains_key);
  if (j.contains("continuation")) rule.continuation = scalar<std::string>(j["continuation"], field + ".continuation");
  int responses = 0;
  if (j.contains(value_key)) {
    rule.response = scalar<T>(j[value_key], field + "." + value_key);
    ++responses;
  }
  if (j.contains("choices")) {
    auto choices = list_of<T>(j["choices"], field + ".choices");
    if (choices.empty()) script_error(field + ".choices must be nonempty");
    rule.response = std::move(choices);
    ++responses;
  }
  if (j.contains("error")) {
    rule.response = parse_error_kind(scalar<std::string>(j["error"], field + ".error"));
    ++responses;
  }
  if (responses != 1) script_error(field + " entries need exactly one of " + value_key + ", choices, error");
  return rule;
}

std::uint64_t fingerprint_index(std::string_view fingerprint, std::size_t n) {
  return std::stoull(std::string(fingerprint.substr(0, 16)), nullptr, 16) % n;
}

template <typename T>
bool rule_matches(const MockScript::Rule<T>& rule, std::string_view text, std::string_view continuation) {
  if (rule.continuation && *rule.continuation != continuation) return false;
  for (const auto& needle : rule.contains) {
    if (text.find(needle) == std::string_view::npos) return false;
  }
  return true;
}

template <typename T>
T resolve(const MockScript::Rule<T>& rule, std::string_view fingerprint) {
  return std::visit(
      [&](const auto& r) -> T {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, T>) {
          return r;
        } else if constexpr (std::is_same_v<R, std::vector<T>>) {
          return r[fingerprint_index(fingerprint, r.size())];
        } else {
          throw BackendError(r, "mock: scripted " + std::string(to_string(r)) + " error");
        }
      },
      rule.response);
}

}  // namespace

std::string generation_fingerprint(const MessageSeq& prompt) { return sha256_hex(flatten_transcript(prompt)); }

std::string score_fingerprint(std::string_view prefix, std::string_view continuation) {
  std::string key(prefix);
  key.push_back('\x1f');
  key.append(continuation);
  return sha256_hex(key);
}

MockScript MockScript::parse(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    script_error(e.what());
  }
  if (!doc.is_object()) script_error("top level must be an object");
  MockScript s;
  if (doc.contains("generate")) {
    if (!doc["generate"].is_object()) script_error("generate must be an object");
    for (const auto& [k, v] : doc["generate"].items()) s.generate.emplace(k, scalar<std::string>(v, "generate"));
  }
  if (doc.contains("generate_rules")) {
    if (!doc["generate_rules"].is_array()) script_error("generate_rules must be an array");
    for (const auto& r : doc["generate_rules"]) s.generate_rules.push_back(parse_rule<std::string>(r, "generate_rules", "text"));
  }
  if (doc.contains("generate_fallback")) s.generate_fallback = list_of<std::string>(doc["generate_fallback"], "generate_fallback");
  if (doc.contains("score")) {
    if (!doc["score"].is_object()) script_error("score must be an object");
    for (const auto& [k, v] : doc["score"].items()) s.score.emplace(k, scalar<double>(v, "score"));
  }
  if (doc.contains("score_rules")) {
    if (!doc["score_rules"].is_array()) script_error("score_rules must be an array");
    for (const auto& r : doc["score_rules"]) s.score_rules.push_back(parse_rule<double>(r, "score_rules", "logprob"));
  }
  if (doc.contains("score_fallback")) s.score_fallback = list_of<double>(doc["score_fallback"], "score_fallback");
  return s;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open mock script " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse(text);
}

MockBackend::MockBackend(MockScript script, std::string model_name)
    : script_(std::move(script)), model_name_(std::move(model_name)) {}

std::string MockBackend::generate(const MessageSeq& prompt, int max_new_tokens) const {
  if (max_new_tokens < 1) throw PreconditionError("generate: max_new_tokens must be >= 1");
  const auto text = flatten_transcript(prompt);
  const auto fp = sha256_hex(text);
  if (auto it = script_.generate.find(fp); it != script_.generate.end()) return it->second;
  for (const auto& rule : script_.generate_rules) {
    if (rule_matches(rule, text, {})) return resolve(rule, fp);
  }
  if (!script_.generate_fallback.empty()) {
    return script_.generate_fallback[fingerprint_index(fp, script_.generate_fallback.size())];
  }
  throw BackendError(BackendErrorKind::NoScriptedResponse, "mock: no scripted response for generation " + fp);
}

ScoredContinuation MockBackend::score_continuation(std::string_view prefix, std::string_view continuation) const {
  if (continuation.empty()) throw PreconditionError("score_continuation: continuation must be nonempty");
  if (!script_.can_score()) throw BackendError(BackendErrorKind::Capability, "mock: script defines no scores");
  const auto fp = score_fingerprint(prefix, continuation);
  const std::string cont(continuation);
  if (auto it = script_.score.find(fp); it != script_.score.end()) return {cont, it->second};
  for (const auto& rule : script_.score_rules) {
    if (rule_matches(rule, prefix, continuation)) return {cont, resolve(rule, fp)};
  }
  if (!script_.score_fallback.empty()) {
    return {cont, script_.score_fallback[fingerprint_index(fp, script_.score_fallback.size())]};
  }
  throw BackendError(BackendErrorKind::NoScriptedResponse, "mock: no scripted score for " + fp);
}

}  // namespace cwpor
