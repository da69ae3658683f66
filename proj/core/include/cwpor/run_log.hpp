#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cwpor/confidence.hpp"
#include "cwpor/judge_parser.hpp"
#include "cwpor/metrics.hpp"
#include "cwpor/prompt_kit.hpp"

namespace cwpor {

inline constexpr int kLogSchemaVersion = 1;

// JSON-lines run log. Line 1 is the header; every following line is one
// entry, in canonical order (question index major, verbosity minor).
struct LogHeader {
  int schema_version = kLogSchemaVersion;
  std::string template_version;
  std::string config_fingerprint;
  std::uint64_t seed = 0;
  std::size_t question_count = 0;
  std::vector<int> verbosity_levels;
  std::string dataset_sha256;
  std::map<std::string, std::string> models;  // role -> model name

  std::size_t expected_entries() const noexcept { return question_count * verbosity_levels.size(); }
  friend bool operator==(const LogHeader&, const LogHeader&) = default;
};

struct TrialEntry {
  std::size_t index = 0;  // canonical position
  std::size_t question_index = 0;
  TrialKey key;
  std::string question;
  std::string distractor;
  Assignment assignment{Label::A};
  AgentTurn neutral_turn{};
  AgentTurn persuasive_turn{};
  std::vector<std::string> judge_raw;  // first reply, then the reformat retry if any
  JudgeVerdict verdict;
  LogprobPair logprobs{};
  LlcResult llc{};
  std::optional<ConfidenceBundle> confidence;  // absent for failed parses
  std::optional<bool> override;                // absent for failed parses
};

struct InstanceErrorEntry {
  std::size_t index = 0;
  std::size_t question_index = 0;
  TrialKey key;
  std::string stage;       // neutral_generation, persuasive_generation, judge_generation, llc_scoring
  std::string error_kind;  // BackendErrorKind name or "empty_generation"
  std::string message;
  int attempts = 0;
};

using LogEntry = std::variant<TrialEntry, InstanceErrorEntry>;

std::size_t entry_index(const LogEntry& entry) noexcept;

std::string serialize_header(const LogHeader& header);
// Each entry also records the template version and config fingerprint.
std::string serialize_entry(const LogEntry& entry, const LogHeader& header);

// Throw LogError on malformed lines or unsupported schema versions.
LogHeader parse_header_line(std::string_view line);
LogEntry parse_entry_line(std::string_view line);

struct RunLog {
  LogHeader header;
  std::vector<LogEntry> entries;
  std::vector<std::string> lines;  // raw entry lines, parallel to `entries`
  bool truncated_tail = false;     // a final partial line was dropped
};

// Reads a whole log. An unparseable final line (an interrupted write) is
// dropped and flagged; any other malformed line throws LogError.
RunLog read_run_log(const std::filesystem::path& path);

// Usable trial for metrics, or nullopt for failed parses.
std::optional<TrialRecord> to_trial_record(const TrialEntry& entry);

struct LogTally {
  std::size_t trials = 0;          // usable (parsed) trials
  std::size_t parse_failures = 0;
  std::size_t instance_errors = 0;
  std::size_t total() const noexcept { return trials + parse_failures + instance_errors; }
};

LogTally tally(const RunLog& log);

}  // namespace cwpor
