#include "cwpor/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "cwpor/csv.hpp"
#include "cwpor/digest.hpp"
#include "cwpor/error.hpp"
#include "json.hpp"

namespace cwpor {
namespace {

using nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string ordinal_id(std::size_t row) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "q%04zu", row);
  return buf;
}

std::string row_label(std::size_t row) { return "row " + std::to_string(row); }

[[noreturn]] void schema_error(std::size_t row, std::string_view field, std::string_view what) {
  throw DatasetError(row_label(row) + ", field '" + std::string(field) + "': " + std::string(what));
}

void check_unique_ids(const std::vector<QuestionRecord>& records) {
  std::map<std::string_view, std::size_t> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto [it, inserted] = seen.emplace(records[i].id, i);
    if (!inserted) {
      throw DatasetError(row_label(i) + ": duplicate id '" + records[i].id + "' (first used by " +
                         row_label(it->second) + ")");
    }
  }
}

void validate_at(const QuestionRecord& r, std::size_t row) {
  try {
    validate_record(r);
  } catch (const DatasetError& e) {
    throw DatasetError(row_label(row) + ": " + e.what());
  }
}

constexpr std::string_view kColType = "Type";
constexpr std::string_view kColCategory = "Category";
constexpr std::string_view kColQuestion = "Question";
constexpr std::string_view kColBest = "Best Answer";
constexpr std::string_view kColCorrect = "Correct Answers";
constexpr std::string_view kColIncorrect = "Incorrect Answers";
constexpr std::string_view kColId = "Id";

}  // namespace

std::string_view to_string(QuestionType t) noexcept {
  return t == QuestionType::Adversarial ? "Adversarial" : "Non-Adversarial";
}

QuestionType parse_question_type(std::string_view s) {
  std::string key;
  for (const char c : trim(s)) {
    if (c == '-' || c == '_' || c == ' ') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "adversarial") return QuestionType::Adversarial;
  if (key == "nonadversarial") return QuestionType::NonAdversarial;
  throw DatasetError("unknown question type '" + std::string(s) + "'");
}

DatasetFormat format_from_extension(const std::filesystem::path& path) {
  const auto ext = lower(path.extension().string());
  if (ext == ".csv") return DatasetFormat::Csv;
  if (ext == ".json") return DatasetFormat::Json;
  throw DatasetError("cannot infer dataset format from extension of " + path.string());
}

std::vector<std::string> split_answers(std::string_view cell) {
  std::vector<std::string> out;
  while (true) {
    const auto pos = cell.find(';');
    const auto piece = trim(cell.substr(0, pos));
    if (!piece.empty()) out.emplace_back(piece);
    if (pos == std::string_view::npos) break;
    cell.remove_prefix(pos + 1);
  }
  return out;
}

void validate_record(const QuestionRecord& r) {
  if (r.id.empty()) throw DatasetError("id is empty");
  if (trim(r.question).empty()) throw DatasetError("question is empty");
  if (trim(r.best_answer).empty()) throw DatasetError("best answer is empty");
  if (r.correct_answers.empty()) throw DatasetError("no correct answers");
  if (r.incorrect_answers.empty()) throw DatasetError("no incorrect answers");
  if (std::find(r.correct_answers.begin(), r.correct_answers.end(), r.best_answer) ==
      r.correct_answers.end()) {
    throw DatasetError("best answer '" + r.best_answer + "' is not among the correct answers");
  }
  const std::set<std::string_view> correct(r.correct_answers.begin(), r.correct_answers.end());
  for (const auto& wrong : r.incorrect_answers) {
    if (correct.contains(wrong)) {
      throw DatasetError("answer '" + wrong + "' is listed as both correct and incorrect");
    }
  }
}

std::vector<QuestionRecord> parse_dataset_csv(std::string_view text) {
  auto rows = csv::parse(text);
  // Drop fully blank lines.
  std::erase_if(rows, [](const csv::Row& r) { return r.size() == 1 && trim(r[0]).empty(); });
  if (rows.empty()) throw DatasetError("csv: missing header row");

  const auto& header = rows.front();
  std::map<std::string, std::size_t, std::less<>> column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    column.emplace(std::string(trim(header[i])), i);
  }
  for (const auto name : {kColType, kColCategory, kColQuestion, kColBest, kColCorrect, kColIncorrect}) {
    if (!column.contains(name)) {
      throw DatasetError("csv header: missing required column '" + std::string(name) + "'");
    }
  }
  const auto id_col = [&]() -> std::optional<std::size_t> {
    if (auto it = column.find(kColId); it != column.end()) return it->second;
    return std::nullopt;
  }();

  std::vector<QuestionRecord> records;
  records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t row = r - 1;
    const auto& cells = rows[r];
    auto cell = [&](std::string_view name) -> std::string_view {
      const auto idx = column.find(name)->second;
      if (idx >= cells.size()) schema_error(row, name, "missing cell");
      return cells[idx];
    };
    QuestionRecord rec;
    if (id_col && *id_col < cells.size() && !trim(cells[*id_col]).empty()) {
      rec.id = std::string(trim(cells[*id_col]));
    } else {
      rec.id = ordinal_id(row);
    }
    try {
      rec.qtype = parse_question_type(cell(kColType));
    } catch (const DatasetError& e) {
      schema_error(row, kColType, e.what());
    }
    rec.category = std::string(trim(cell(kColCategory)));
    rec.question = std::string(trim(cell(kColQuestion)));
    rec.best_answer = std::string(trim(cell(kColBest)));
    rec.correct_answers = split_answers(cell(kColCorrect));
    rec.incorrect_answers = split_answers(cell(kColIncorrect));
    if (rec.category.empty()) schema_error(row, kColCategory, "empty");
    if (rec.question.empty()) schema_error(row, kColQuestion, "empty");
    if (rec.best_answer.empty()) schema_error(row, kColBest, "empty");
    if (rec.correct_answers.empty()) schema_error(row, kColCorrect, "empty");
    if (rec.incorrect_answers.empty()) schema_error(row, kColIncorrect, "empty");
    validate_at(rec, row);
    records.push_back(std::move(rec));
  }
  check_unique_ids(records);
  return records;
}

std::vector<QuestionRecord> parse_dataset_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DatasetError(std::string("json: ") + e.what());
  }
  if (!doc.is_array()) throw DatasetError("json: top level must be an array of question objects");

  std::vector<QuestionRecord> records;
  records.reserve(doc.size());
  for (std::size_t row = 0; row < doc.size(); ++row) {
    const auto& obj = doc[row];
    if (!obj.is_object()) throw DatasetError(row_label(row) + ": expected an object");
    auto text_field = [&](std::string_view name) -> std::string {
      const auto it = obj.find(name);
      if (it == obj.end()) schema_error(row, name, "missing");
      if (!it->is_string()) schema_error(row, name, "expected a string");
      auto value = std::string(trim(it->get_ref<const std::string&>()));
      if (value.empty()) schema_error(row, name, "empty");
      return value;
    };
    auto list_field = [&](std::string_view name) {
      const auto it = obj.find(name);
      if (it == obj.end()) schema_error(row, name, "missing");
      if (!it->is_array()) schema_error(row, name, "expected an array of strings");
      std::vector<std::string> out;
      for (const auto& v : *it) {
        if (!v.is_string()) schema_error(row, name, "expected an array of strings");
        const auto piece = trim(v.get_ref<const std::string&>());
        if (!piece.empty()) out.emplace_back(piece);
      }
      if (out.empty()) schema_error(row, name, "empty");
      return out;
    };

    QuestionRecord rec;
    if (const auto it = obj.find("id"); it != obj.end()) {
      if (!it->is_string() || trim(it->get_ref<const std::string&>()).empty()) {
        schema_error(row, "id", "expected a nonempty string");
      }
      rec.id = std::string(trim(it->get_ref<const std::string&>()));
    } else {
      rec.id = ordinal_id(row);
    }
    try {
      rec.qtype = parse_question_type(text_field("type"));
    } catch (const DatasetError& e) {
      schema_error(row, "type", e.what());
    }
    rec.category = text_field("category");
    rec.question = text_field("question");
    rec.best_answer = text_field("best_answer");
    rec.correct_answers = list_field("correct_answers");
    rec.incorrect_answers = list_field("incorrect_answers");
    validate_at(rec, row);
    records.push_back(std::move(rec));
  }
  check_unique_ids(records);
  return records;
}

std::vector<QuestionRecord> load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open dataset " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw DatasetError("read failure on dataset " + path.string());
  try {
    return format == DatasetFormat::Csv ? parse_dataset_csv(text) : parse_dataset_json(text);
  } catch (const DatasetError& e) {
    throw DatasetError(path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw DatasetError(path.string() + ": " + e.what());
  }
}

void write_dataset_csv(std::ostream& out, std::span<const QuestionRecord> records) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += "; ";
      s += v[i];
    }
    return s;
  };
  csv::write_row(out, {std::string(kColId), std::string(kColType), std::string(kColCategory),
                       std::string(kColQuestion), std::string(kColBest), std::string(kColCorrect),
                       std::string(kColIncorrect)});
  for (const auto& r : records) {
    csv::write_row(out, {r.id, std::string(to_string(r.qtype)), r.category, r.question, r.best_answer,
                         join(r.correct_answers), join(r.incorrect_answers)});
  }
}

void write_dataset_json(std::ostream& out, std::span<const QuestionRecord> records) {
  json doc = json::array();
  for (const auto& r : records) {
    doc.push_back({{"id", r.id},
                   {"type", to_string(r.qtype)},
                   {"category", r.category},
                   {"question", r.question},
                   {"best_answer", r.best_answer},
                   {"correct_answers", r.correct_answers},
                   {"incorrect_answers", r.incorrect_answers}});
  }
  out << doc.dump(2) << '\n';
}

std::string_view to_string(DistractorPolicy p) noexcept {
  return p == DistractorPolicy::First ? "first" : "seeded_uniform";
}

DistractorPolicy parse_distractor_policy(std::string_view s) {
  if (s == "first") return DistractorPolicy::First;
  if (s == "seeded_uniform") return DistractorPolicy::SeededUniform;
  throw ConfigError("unknown distractor policy '" + std::string(s) + "'");
}

const std::string& select_distractor(const QuestionRecord& record, DistractorPolicy policy,
                                     std::uint64_t seed) {
  if (record.incorrect_answers.empty()) throw PreconditionError("select_distractor: record has no distractors");
  if (policy == DistractorPolicy::First || record.incorrect_answers.size() == 1) {
    return record.incorrect_answers.front();
  }
  CounterRng rng(seed, fnv1a64(record.id));
  return record.incorrect_answers[rng.below(record.incorrect_answers.size())];
}

}  // namespace cwpor
