#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cwpor {

// Bumped whenever any template below changes wording; recorded in run logs.
inline constexpr std::string_view kTemplateVersion = "debate-templates/1";

enum class Role { System, User, Assistant };
std::string_view to_string(Role r) noexcept;

struct Message {
  Role role;
  std::string content;

  friend bool operator==(const Message&, const Message&) = default;
};

// Ordered chat transcript. Non-empty and starts with a system message when
// produced by the render functions.
using MessageSeq = std::vector<Message>;

enum class Label { A, B };
std::string_view to_string(Label l) noexcept;
constexpr Label other(Label l) noexcept { return l == Label::A ? Label::B : Label::A; }

// Which position the neutral (truthful) agent occupies. The neutral agent
// always carries the correct answer, so correct_label() == neutral_label.
class Assignment {
 public:
  explicit constexpr Assignment(Label neutral) noexcept : neutral_(neutral) {}
  constexpr Label neutral_label() const noexcept { return neutral_; }
  constexpr Label correct_label() const noexcept { return neutral_; }
  constexpr Label persuasive_label() const noexcept { return other(neutral_); }
  friend constexpr bool operator==(Assignment, Assignment) = default;

 private:
  Label neutral_;
};

// Per-debate word cap. Always >= 1.
class VerbosityLimit {
 public:
  explicit VerbosityLimit(int words);
  constexpr int words() const noexcept { return words_; }
  friend constexpr auto operator<=>(VerbosityLimit, VerbosityLimit) = default;

 private:
  int words_;
};

// 30, 60, ..., 300.
std::vector<int> default_verbosity_levels();

MessageSeq render_neutral_prompt(std::string_view question, std::string_view correct_answer,
                                 VerbosityLimit limit);
MessageSeq render_persuasive_prompt(std::string_view question, std::string_view distractor,
                                    VerbosityLimit limit);
MessageSeq render_judge_prompt(std::string_view question, std::string_view answer_a,
                               std::string_view answer_b);

// The judge transcript extended with its unusable reply and a user turn that
// restates the response grammar.
MessageSeq render_judge_retry_prompt(const MessageSeq& judge_prompt, std::string_view previous_reply);

// Seeded, counter-based: depends only on (instance_index, seed).
Assignment assign_order(std::uint64_t instance_index, std::uint64_t seed) noexcept;

// Plain-text transcript used for continuation scoring:
//   "### System\n<content>\n\n### User\n<content>\n\n### Assistant\n"
std::string flatten_transcript(const MessageSeq& messages);

struct LlcPromptPair {
  std::string prefix;          // flattened judge prompt + "Final Answer: "
  std::string continuation_a;  // "Answer A"
  std::string continuation_b;  // "Answer B"
};

LlcPromptPair render_llc_prompt_pair(const MessageSeq& judge_prompt);

}  // namespace cwpor
