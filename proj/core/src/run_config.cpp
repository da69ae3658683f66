#include "cwpor/run_config.hpp"

#include <fstream>
#include <iterator>

#include "cwpor/digest.hpp"
#include "cwpor/error.hpp"
#include "cwpor/prompt_kit.hpp"
#include "cwpor/run_log.hpp"
#include "json.hpp"

namespace cwpor {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { throw ConfigError("config: " + what); }

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    config_error(std::string("field '") + key + "' has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

BackendConfig parse_backend(const json& obj, const std::filesystem::path& base, const std::string& role) {
  if (!obj.is_object()) config_error("backend for " + role + " must be an object");
  BackendConfig b;
  const auto kind = get_or<std::string>(obj, "kind", "http");
  if (kind == "http") {
    b.kind = BackendKind::Http;
  } else if (kind == "mock") {
    b.kind = BackendKind::Mock;
  } else {
    config_error("unknown backend kind '" + kind + "' for " + role);
  }
  b.endpoint = get_or<std::string>(obj, "endpoint", "");
  b.model_name = get_or<std::string>(obj, "model", "");
  b.timeout = std::chrono::milliseconds(get_or<std::int64_t>(obj, "timeout_ms", b.timeout.count()));
  b.max_retries = get_or<int>(obj, "max_retries", b.max_retries);
  b.initial_backoff = std::chrono::milliseconds(get_or<std::int64_t>(obj, "initial_backoff_ms", b.initial_backoff.count()));
  b.deterministic = get_or<bool>(obj, "deterministic", true);
  b.api_key_env = get_or<std::string>(obj, "api_key_env", b.api_key_env);
  b.mock_script = resolve(base, get_or<std::string>(obj, "script", ""));

  if (b.model_name.empty()) config_error("backend for " + role + " needs a model name");
  if (b.kind == BackendKind::Http && b.endpoint.empty()) config_error("http backend for " + role + " needs an endpoint");
  if (b.kind == BackendKind::Mock && b.mock_script.empty()) config_error("mock backend for " + role + " needs a script");
  if (b.max_retries < 0) config_error("max_retries must be >= 0");
  if (b.timeout.count() <= 0) config_error("timeout_ms must be > 0");
  return b;
}

json backend_identity(const BackendConfig& b) {
  json j = {{"kind", b.kind == BackendKind::Mock ? "mock" : "http"},
            {"model", b.model_name},
            {"deterministic", b.deterministic}};
  if (b.kind == BackendKind::Http) {
    j["endpoint"] = b.endpoint;
  } else {
    try {
      j["script_sha256"] = sha256_file_hex(b.mock_script);
    } catch (const Error& e) {
      throw ConfigError(std::string("mock script: ") + e.what());
    }
  }
  return j;
}

}  // namespace

DatasetFormat RunConfig::resolved_dataset_format() const {
  if (dataset_format) return *dataset_format;
  try {
    return format_from_extension(dataset);
  } catch (const DatasetError& e) {
    throw ConfigError(e.what());
  }
}

void RunConfig::validate() const {
  if (dataset.empty()) config_error("dataset path is required");
  if (output.empty()) config_error("output path is required");
  if (verbosity_levels.empty()) config_error("verbosity_levels must be nonempty");
  for (std::size_t i = 0; i < verbosity_levels.size(); ++i) {
    if (verbosity_levels[i] < 1) config_error("verbosity levels must be >= 1");
    if (i && verbosity_levels[i] <= verbosity_levels[i - 1]) config_error("verbosity_levels must be strictly increasing");
  }
  if (max_parallel < 1) config_error("max_parallel must be >= 1");
  if (judge_max_tokens < 1) config_error("judge_max_tokens must be >= 1");
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(e.what());
  }
  if (!doc.is_object()) config_error("top level must be an object");

  RunConfig c;
  c.dataset = resolve(base_dir, get_or<std::string>(doc, "dataset", ""));
  if (doc.contains("dataset_format")) {
    const auto f = get_or<std::string>(doc, "dataset_format", "");
    if (f == "csv") {
      c.dataset_format = DatasetFormat::Csv;
    } else if (f == "json") {
      c.dataset_format = DatasetFormat::Json;
    } else {
      config_error("dataset_format must be csv or json");
    }
  }
  c.verbosity_levels = get_or<std::vector<int>>(doc, "verbosity_levels", c.verbosity_levels);
  c.seed = get_or<std::uint64_t>(doc, "seed", c.seed);
  c.distractor_policy = parse_distractor_policy(get_or<std::string>(doc, "distractor_policy", "first"));
  c.limit_policy = parse_limit_policy(get_or<std::string>(doc, "limit_policy", "record_only"));
  c.max_parallel = get_or<int>(doc, "max_parallel", c.max_parallel);
  c.judge_max_tokens = get_or<int>(doc, "judge_max_tokens", c.judge_max_tokens);
  c.output = resolve(base_dir, get_or<std::string>(doc, "output", ""));

  if (!doc.contains("backend")) config_error("backend section is required");
  const json shared = doc["backend"];
  const json roles = doc.value("roles", json::object());
  if (!roles.is_object()) config_error("roles must be an object");
  for (const auto& [name, _] : roles.items()) {
    if (name != "neutral" && name != "persuasive" && name != "judge") config_error("unknown role '" + name + "'");
  }
  auto role_backend = [&](const char* role) {
    json merged = shared;
    if (roles.contains(role)) merged.merge_patch(roles[role]);
    return parse_backend(merged, base_dir, role);
  };
  c.neutral = role_backend("neutral");
  c.persuasive = role_backend("persuasive");
  c.judge = role_backend("judge");
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_run_config(text, path.parent_path());
}

int agent_max_new_tokens(int verbosity) noexcept { return (verbosity * 5 + 1) / 2; }

std::string config_fingerprint(const RunConfig& config, std::string_view dataset_digest) {
  const json identity = {
      {"dataset_sha256", dataset_digest},
      {"template_version", kTemplateVersion},
      {"log_schema_version", kLogSchemaVersion},
      {"seed", config.seed},
      {"verbosity_levels", config.verbosity_levels},
      {"distractor_policy", to_string(config.distractor_policy)},
      {"limit_policy", to_string(config.limit_policy)},
      {"judge_max_tokens", config.judge_max_tokens},
      {"neutral", backend_identity(config.neutral)},
      {"persuasive", backend_identity(config.persuasive)},
      {"judge", backend_identity(config.judge)},
  };
  return sha256_hex(identity.dump());
}

}  // namespace cwpor
