#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "cwpor/prompt_kit.hpp"

namespace cwpor {

enum class ParseStatus { Ok, Recovered, Failed };
std::string_view to_string(ParseStatus s) noexcept;
ParseStatus parse_parse_status(std::string_view s);

struct JudgeDecision {
  Label chosen_label;
  std::string rationale;
  int rubric_confidence;  // 1..5

  friend bool operator==(const JudgeDecision&, const JudgeDecision&) = default;
};

// A failed parse carries no decision at all.
struct JudgeVerdict {
  ParseStatus status = ParseStatus::Failed;
  std::optional<JudgeDecision> decision;

  bool usable() const noexcept { return status != ParseStatus::Failed; }
  friend bool operator==(const JudgeVerdict&, const JudgeVerdict&) = default;
};

// Total: every input yields exactly one status.
//
// Strict grammar (status Ok), surrounding whitespace and CRLF tolerated:
//   Rationale: <text>
//   Confidence: <1-5>
//   Final Answer: Answer <A|B>
//
// Lenient pass (status Recovered): case-insensitive, any line order, prose
// around the fields. Requires every final-answer clause to name the same
// single label and every confidence cue to carry the same integer in 1..5.
// Out-of-range or conflicting values fail; nothing is clamped or guessed.
JudgeVerdict parse_verdict(std::string_view raw);

// Number of maximal runs of non-whitespace characters.
int count_words(std::string_view text) noexcept;

enum class LimitPolicy { RecordOnly, Truncate };
std::string_view to_string(LimitPolicy p) noexcept;
LimitPolicy parse_limit_policy(std::string_view s);

// RecordOnly returns the text unchanged; Truncate keeps the first `limit`
// words joined by single spaces.
std::string enforce_limit(std::string_view text, VerbosityLimit limit, LimitPolicy policy);

enum class AgentRole { Neutral, Persuasive };
std::string_view to_string(AgentRole r) noexcept;

struct AgentTurn {
  AgentRole role;
  std::string text;    // after the limit policy
  int word_count;      // of `text`
  int raw_word_count;  // of the generation before the policy was applied
  bool within_limit;   // word_count <= limit

  friend bool operator==(const AgentTurn&, const AgentTurn&) = default;
};

AgentTurn make_agent_turn(AgentRole role, std::string_view generated, VerbosityLimit limit,
                          LimitPolicy policy);

}  // namespace cwpor
