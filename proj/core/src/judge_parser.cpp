#include "cwpor/judge_parser.hpp"

#include <cctype>
#include <regex>
#include <set>
#include <vector>

#include "cwpor/error.hpp"

namespace cwpor {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> lines;
  while (true) {
    const auto pos = s.find('\n');
    auto line = s.substr(0, pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return lines;
}

bool consume(std::string_view& s, std::string_view prefix) {
  if (!s.starts_with(prefix)) return false;
  s.remove_prefix(prefix.size());
  return true;
}

std::optional<JudgeDecision> parse_strict(std::string_view raw) {
  std::vector<std::string_view> lines;
  for (auto line : split_lines(trim(raw))) lines.push_back(line);
  if (lines.size() != 3) return std::nullopt;

  auto rationale_line = lines[0];
  if (!consume(rationale_line, "Rationale: ")) return std::nullopt;
  const auto rationale = trim(rationale_line);
  if (rationale.empty()) return std::nullopt;

  auto confidence_line = trim(lines[1]);
  if (!consume(confidence_line, "Confidence: ")) return std::nullopt;
  if (confidence_line.size() != 1 || confidence_line[0] < '1' || confidence_line[0] > '5') {
    return std::nullopt;
  }

  const auto answer_line = trim(lines[2]);
  Label label;
  if (answer_line == "Final Answer: Answer A") {
    label = Label::A;
  } else if (answer_line == "Final Answer: Answer B") {
    label = Label::B;
  } else {
    return std::nullopt;
  }
  return JudgeDecision{label, std::string(rationale), confidence_line[0] - '0'};
}

const std::regex& final_answer_cue() {
  static const std::regex re(R"(final\s*answer\s*(?:is)?\s*[:=\-]?)", std::regex::icase);
  return re;
}

// Label mentions inside a final-answer clause: "Answer A", "option (b)", or
// a bare letter that opens the clause ("Final answer: **B**").
const std::regex& prefixed_label() {
  static const std::regex re(R"(\b(?:answer|option)\s*[\(\[]?([ab])\b)", std::regex::icase);
  return re;
}

const std::regex& leading_label() {
  static const std::regex re(R"(^\s*[\*\(\["']*([ab])(?=$|[^a-z0-9]))", std::regex::icase);
  return re;
}

Label label_from(const std::ssub_match& m) {
  return (m.str()[0] == 'a' || m.str()[0] == 'A') ? Label::A : Label::B;
}

const std::regex& confidence_cue() {
  static const std::regex re(
      R"(confidence(?:\s+(?:score|rating|level))?\s*(?:[:=]|is|of)?\s*[\(\[\*]*\s*(-?\d+(?:\.\d+)?))",
      std::regex::icase);
  return re;
}

const std::regex& rationale_cue() {
  static const std::regex re(R"(^\W*rationale\W*:\s*(.*)$)", std::regex::icase);
  return re;
}

std::optional<JudgeDecision> parse_lenient(std::string_view raw) {
  const std::string text(raw);

  // Labels: collect every mention inside every final-answer clause. A clause
  // runs from the cue to the end of its line or the next confidence cue.
  std::set<Label> labels;
  std::size_t clause_count = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), final_answer_cue());
       it != std::sregex_iterator(); ++it) {
    const auto start = static_cast<std::size_t>(it->position(0) + it->length(0));
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string clause = text.substr(start, end - start);
    std::smatch conf;
    if (std::regex_search(clause, conf, std::regex("confidence", std::regex::icase))) {
      clause.resize(static_cast<std::size_t>(conf.position(0)));
    }
    ++clause_count;
    std::size_t mentions = 0;
    for (auto m = std::sregex_iterator(clause.begin(), clause.end(), prefixed_label());
         m != std::sregex_iterator(); ++m) {
      labels.insert(label_from((*m)[1]));
      ++mentions;
    }
    if (std::smatch m; mentions == 0 && std::regex_search(clause, m, leading_label())) {
      labels.insert(label_from(m[1]));
      ++mentions;
    }
    // A clause that names nothing ("final answer: unsure") makes the whole
    // reply ambiguous.
    if (mentions == 0) return std::nullopt;
  }
  if (clause_count == 0 || labels.size() != 1) return std::nullopt;

  std::set<std::string> confidences;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), confidence_cue());
       it != std::sregex_iterator(); ++it) {
    confidences.insert((*it)[1].str());
  }
  if (confidences.size() != 1) return std::nullopt;
  const auto& value = *confidences.begin();
  if (value.size() != 1 || value[0] < '1' || value[0] > '5') return std::nullopt;

  std::string rationale;
  for (const auto line : split_lines(text)) {
    const std::string l(line);
    std::smatch m;
    if (std::regex_match(l, m, rationale_cue())) {
      rationale = std::string(trim(m[1].str()));
      break;
    }
  }
  return JudgeDecision{*labels.begin(), std::move(rationale), value[0] - '0'};
}

}  // namespace

std::string_view to_string(ParseStatus s) noexcept {
  switch (s) {
    case ParseStatus::Ok: return "ok";
    case ParseStatus::Recovered: return "recovered";
    case ParseStatus::Failed: return "failed";
  }
  return "failed";
}

ParseStatus parse_parse_status(std::string_view s) {
  if (s == "ok") return ParseStatus::Ok;
  if (s == "recovered") return ParseStatus::Recovered;
  if (s == "failed") return ParseStatus::Failed;
  throw Error("unknown parse status '" + std::string(s) + "'");
}

JudgeVerdict parse_verdict(std::string_view raw) {
  if (auto strict = parse_strict(raw)) return {ParseStatus::Ok, std::move(strict)};
  if (auto lenient = parse_lenient(raw)) return {ParseStatus::Recovered, std::move(lenient)};
  return {ParseStatus::Failed, std::nullopt};
}

int count_words(std::string_view text) noexcept {
  int words = 0;
  bool in_word = false;
  for (const char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  return words;
}

std::string_view to_string(LimitPolicy p) noexcept {
  return p == LimitPolicy::RecordOnly ? "record_only" : "truncate";
}

LimitPolicy parse_limit_policy(std::string_view s) {
  if (s == "record_only") return LimitPolicy::RecordOnly;
  if (s == "truncate") return LimitPolicy::Truncate;
  throw ConfigError("unknown limit policy '" + std::string(s) + "'");
}

std::string enforce_limit(std::string_view text, VerbosityLimit limit, LimitPolicy policy) {
  if (policy == LimitPolicy::RecordOnly || count_words(text) <= limit.words()) return std::string(text);
  std::string out;
  int taken = 0;
  std::size_t i = 0;
  while (i < text.size() && taken < limit.words()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const auto start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) {
      if (taken) out.push_back(' ');
      out.append(text.substr(start, i - start));
      ++taken;
    }
  }
  return out;
}

std::string_view to_string(AgentRole r) noexcept {
  return r == AgentRole::Neutral ? "neutral" : "persuasive";
}

AgentTurn make_agent_turn(AgentRole role, std::string_view generated, VerbosityLimit limit,
                          LimitPolicy policy) {
  AgentTurn turn{role, enforce_limit(generated, limit, policy), 0, count_words(generated), false};
  turn.word_count = count_words(turn.text);
  turn.within_limit = turn.word_count <= limit.words();
  return turn;
}

}  // namespace cwpor
