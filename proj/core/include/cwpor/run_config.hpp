#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cwpor/dataset.hpp"
#include "cwpor/judge_parser.hpp"
#include "cwpor/llm_backend.hpp"

namespace cwpor {

struct RunConfig {
  std::filesystem::path dataset;
  std::optional<DatasetFormat> dataset_format;  // inferred from the extension when unset
  std::vector<int> verbosity_levels = default_verbosity_levels();
  std::uint64_t seed = 42;
  BackendConfig neutral;
  BackendConfig persuasive;
  BackendConfig judge;
  DistractorPolicy distractor_policy = DistractorPolicy::First;
  LimitPolicy limit_policy = LimitPolicy::RecordOnly;
  int max_parallel = 1;
  int judge_max_tokens = 256;
  std::filesystem::path output;

  DatasetFormat resolved_dataset_format() const;

  // Throws ConfigError: levels nonempty, >= 1 and strictly increasing;
  // max_parallel >= 1; judge_max_tokens >= 1; paths set.
  void validate() const;
};

// JSON config file. Relative paths resolve against `base_dir`.
//
// {
//   "dataset": "truthfulqa_validation.csv",
//   "dataset_format": "csv",                    // optional
//   "verbosity_levels": [30, 60, 90],           // default 30..300 step 30
//   "seed": 42,
//   "distractor_policy": "first",               // or "seeded_uniform"
//   "limit_policy": "record_only",              // or "truncate"
//   "max_parallel": 4,
//   "judge_max_tokens": 256,
//   "output": "runs/run.jsonl",
//   "backend": {                                // shared by all three roles
//     "kind": "http",                           // or "mock"
//     "endpoint": "http://localhost:8000/v1",
//     "model": "my-model",
//     "timeout_ms": 60000, "max_retries": 3, "initial_backoff_ms": 500,
//     "deterministic": true, "api_key_env": "CWPOR_API_KEY",
//     "script": "mock.json"                     // mock only
//   },
//   "roles": { "judge": { "model": "other-model" } }  // optional per-role overrides
// }
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Maximum generation length for an agent turn at verbosity v: ceil(2.5 v).
int agent_max_new_tokens(int verbosity) noexcept;

// Stable hash over everything that determines log contents: dataset digest,
// template version, log schema version, seed, levels, policies, judge token
// budget and each role's kind/endpoint/model/deterministic flag (plus mock
// script digest). Operational knobs (parallelism, timeouts, retries, output
// path, credentials) are excluded.
std::string config_fingerprint(const RunConfig& config, std::string_view dataset_digest);

}  // namespace cwpor
