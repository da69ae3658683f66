#include "cwpor/run_log.hpp"

#include <fstream>

#include "cwpor/error.hpp"
#include "json.hpp"

namespace cwpor {
namespace {

using nlohmann::json;

[[noreturn]] void log_error(const std::string& what) { throw LogError("run log: " + what); }

Label parse_label(const std::string& s) {
  if (s == "A") return Label::A;
  if (s == "B") return Label::B;
  log_error("bad label '" + s + "'");
}

json turn_json(const AgentTurn& t) {
  return {{"role", to_string(t.role)},
          {"text", t.text},
          {"word_count", t.word_count},
          {"raw_word_count", t.raw_word_count},
          {"within_limit", t.within_limit}};
}

AgentTurn turn_from(const json& j) {
  const auto role = j.at("role").get<std::string>();
  return {role == "neutral" ? AgentRole::Neutral : AgentRole::Persuasive, j.at("text").get<std::string>(),
          j.at("word_count").get<int>(), j.at("raw_word_count").get<int>(), j.at("within_limit").get<bool>()};
}

void put_key(json& j, const TrialKey& k) {
  j["question_id"] = k.question_id;
  j["category"] = k.category;
  j["qtype"] = to_string(k.qtype);
  j["verbosity"] = k.verbosity;
  j["model"] = k.model;
}

TrialKey key_from(const json& j) {
  return {j.at("question_id").get<std::string>(), j.at("category").get<std::string>(),
          parse_question_type(j.at("qtype").get<std::string>()), j.at("verbosity").get<int>(),
          j.at("model").get<std::string>()};
}

json parse_line(std::string_view line) {
  try {
    auto j = json::parse(line);
    if (!j.is_object()) log_error("line is not a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    log_error(e.what());
  }
}

}  // namespace

std::size_t entry_index(const LogEntry& entry) noexcept {
  return std::visit([](const auto& e) { return e.index; }, entry);
}

std::string serialize_header(const LogHeader& h) {
  const json j = {{"entry", "header"},
                  {"schema_version", h.schema_version},
                  {"template_version", h.template_version},
                  {"config_fingerprint", h.config_fingerprint},
                  {"seed", h.seed},
                  {"question_count", h.question_count},
                  {"verbosity_levels", h.verbosity_levels},
                  {"dataset_sha256", h.dataset_sha256},
                  {"models", h.models}};
  return j.dump();
}

std::string serialize_entry(const LogEntry& entry, const LogHeader& header) {
  json j;
  j["template_version"] = header.template_version;
  j["config_fingerprint"] = header.config_fingerprint;
  if (const auto* t = std::get_if<TrialEntry>(&entry)) {
    j["entry"] = "trial";
    j["index"] = t->index;
    j["question_index"] = t->question_index;
    put_key(j, t->key);
    j["question"] = t->question;
    j["distractor"] = t->distractor;
    j["assignment"] = {{"neutral_label", to_string(t->assignment.neutral_label())},
                       {"correct_label", to_string(t->assignment.correct_label())}};
    j["neutral_turn"] = turn_json(t->neutral_turn);
    j["persuasive_turn"] = turn_json(t->persuasive_turn);
    j["judge_raw"] = t->judge_raw;
    json verdict = {{"parse_status", to_string(t->verdict.status)}};
    if (t->verdict.decision) {
      verdict["chosen_label"] = to_string(t->verdict.decision->chosen_label);
      verdict["rationale"] = t->verdict.decision->rationale;
      verdict["rubric_confidence"] = t->verdict.decision->rubric_confidence;
    }
    j["verdict"] = std::move(verdict);
    j["logprobs"] = {{"answer_a", t->logprobs.answer_a}, {"answer_b", t->logprobs.answer_b}};
    j["llc"] = {{"prob_a", t->llc.prob_a},
                {"prob_b", t->llc.prob_b},
                {"value", t->llc.llc},
                {"preferred", to_string(t->llc.preferred)}};
    if (t->confidence) {
      // combined_x5 restates the combined confidence on the 0-5 rubric scale
      // for cross-reference only; metrics use the [0, 1] value.
      j["confidence"] = {{"rubric_norm", t->confidence->rubric_norm},
                         {"llc", t->confidence->llc},
                         {"combined", t->confidence->combined},
                         {"combined_x5", t->confidence->combined * 5.0}};
    } else {
      j["confidence"] = nullptr;
    }
    j["override"] = t->override ? json(*t->override) : json(nullptr);
  } else {
    const auto& e = std::get<InstanceErrorEntry>(entry);
    j["entry"] = "instance_error";
    j["index"] = e.index;
    j["question_index"] = e.question_index;
    put_key(j, e.key);
    j["stage"] = e.stage;
    j["error_kind"] = e.error_kind;
    j["message"] = e.message;
    j["attempts"] = e.attempts;
  }
  return j.dump();
}

LogHeader parse_header_line(std::string_view line) {
  const auto j = parse_line(line);
  try {
    if (j.at("entry").get<std::string>() != "header") log_error("first line is not a header");
    LogHeader h;
    h.schema_version = j.at("schema_version").get<int>();
    if (h.schema_version != kLogSchemaVersion) {
      log_error("unsupported schema version " + std::to_string(h.schema_version));
    }
    h.template_version = j.at("template_version").get<std::string>();
    h.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    h.seed = j.at("seed").get<std::uint64_t>();
    h.question_count = j.at("question_count").get<std::size_t>();
    h.verbosity_levels = j.at("verbosity_levels").get<std::vector<int>>();
    h.dataset_sha256 = j.at("dataset_sha256").get<std::string>();
    h.models = j.at("models").get<std::map<std::string, std::string>>();
    return h;
  } catch (const json::exception& e) {
    log_error(std::string("header: ") + e.what());
  }
}

LogEntry parse_entry_line(std::string_view line) {
  const auto j = parse_line(line);
  try {
    const auto kind = j.at("entry").get<std::string>();
    if (kind == "trial") {
      TrialEntry t;
      t.index = j.at("index").get<std::size_t>();
      t.question_index = j.at("question_index").get<std::size_t>();
      t.key = key_from(j);
      t.question = j.at("question").get<std::string>();
      t.distractor = j.at("distractor").get<std::string>();
      t.assignment = Assignment(parse_label(j.at("assignment").at("neutral_label").get<std::string>()));
      t.neutral_turn = turn_from(j.at("neutral_turn"));
      t.persuasive_turn = turn_from(j.at("persuasive_turn"));
      t.judge_raw = j.at("judge_raw").get<std::vector<std::string>>();
      const auto& v = j.at("verdict");
      t.verdict.status = parse_parse_status(v.at("parse_status").get<std::string>());
      if (t.verdict.status != ParseStatus::Failed) {
        t.verdict.decision = JudgeDecision{parse_label(v.at("chosen_label").get<std::string>()),
                                           v.at("rationale").get<std::string>(),
                                           v.at("rubric_confidence").get<int>()};
      }
      t.logprobs = {j.at("logprobs").at("answer_a").get<double>(), j.at("logprobs").at("answer_b").get<double>()};
      const auto& l = j.at("llc");
      t.llc = {l.at("prob_a").get<double>(), l.at("prob_b").get<double>(), l.at("value").get<double>(),
               parse_label(l.at("preferred").get<std::string>())};
      if (const auto& c = j.at("confidence"); !c.is_null()) {
        t.confidence = ConfidenceBundle{c.at("rubric_norm").get<double>(), c.at("llc").get<double>(),
                                        c.at("combined").get<double>()};
      }
      if (const auto& o = j.at("override"); !o.is_null()) t.override = o.get<bool>();
      if (t.verdict.usable() != (t.confidence.has_value() && t.override.has_value())) {
        log_error("trial " + std::to_string(t.index) + ": confidence/override inconsistent with parse status");
      }
      return t;
    }
    if (kind == "instance_error") {
      InstanceErrorEntry e;
      e.index = j.at("index").get<std::size_t>();
      e.question_index = j.at("question_index").get<std::size_t>();
      e.key = key_from(j);
      e.stage = j.at("stage").get<std::string>();
      e.error_kind = j.at("error_kind").get<std::string>();
      e.message = j.at("message").get<std::string>();
      e.attempts = j.at("attempts").get<int>();
      return e;
    }
    log_error("unknown entry kind '" + kind + "'");
  } catch (const json::exception& e) {
    log_error(e.what());
  } catch (const DatasetError& e) {
    log_error(e.what());
  }
}

RunLog read_run_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LogError("cannot open run log " + path.string());
  std::vector<std::string> lines;
  std::string line;
  bool last_terminated = true;
  while (std::getline(in, line)) {
    last_terminated = !in.eof();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw LogError("read failure on run log " + path.string());
  if (lines.empty()) throw LogError("run log " + path.string() + " is empty");

  RunLog log;
  log.header = parse_header_line(lines.front());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() && i + 1 == lines.size()) break;
    try {
      log.entries.push_back(parse_entry_line(lines[i]));
      if (i + 1 == lines.size() && !last_terminated) {
        // Complete JSON but no newline: the writer died before the newline.
        log.truncated_tail = true;
      }
      log.lines.push_back(lines[i]);
    } catch (const LogError&) {
      if (i + 1 == lines.size()) {
        log.truncated_tail = true;
        break;
      }
      throw;
    }
  }
  return log;
}

std::optional<TrialRecord> to_trial_record(const TrialEntry& entry) {
  if (!entry.verdict.usable() || !entry.confidence || !entry.override) return std::nullopt;
  return TrialRecord{entry.key, *entry.override, *entry.confidence};
}

LogTally tally(const RunLog& log) {
  LogTally t;
  for (const auto& e : log.entries) {
    if (const auto* trial = std::get_if<TrialEntry>(&e)) {
      trial->verdict.usable() ? ++t.trials : ++t.parse_failures;
    } else {
      ++t.instance_errors;
    }
  }
  return t;
}

}  // namespace cwpor
