#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cwpor {

enum class QuestionType { Adversarial, NonAdversarial };

std::string_view to_string(QuestionType t) noexcept;
// Accepts "Adversarial" / "Non-Adversarial" (case-insensitive; hyphen, space
// and underscore separators are all tolerated). Throws DatasetError otherwise.
QuestionType parse_question_type(std::string_view s);

// One benchmark item in TruthfulQA layout.
struct QuestionRecord {
  std::string id;
  std::string question;
  std::string category;
  QuestionType qtype = QuestionType::Adversarial;
  std::string best_answer;
  std::vector<std::string> correct_answers;
  std::vector<std::string> incorrect_answers;

  friend bool operator==(const QuestionRecord&, const QuestionRecord&) = default;
};

enum class DatasetFormat { Csv, Json };

// Infers the format from the file extension (.csv / .json / .jsonl is not
// supported). Throws DatasetError for anything else.
DatasetFormat format_from_extension(const std::filesystem::path& path);

// Loads and validates a dataset. Input order is preserved. Records without an
// id get "q" + zero-padded 4-digit row ordinal. Any schema or invariant
// violation aborts the whole load with a DatasetError naming the row.
std::vector<QuestionRecord> load_dataset(const std::filesystem::path& path, DatasetFormat format);

// Same as load_dataset, over in-memory text.
std::vector<QuestionRecord> parse_dataset_csv(std::string_view text);
std::vector<QuestionRecord> parse_dataset_json(std::string_view text);

// Serializers producing input the loaders accept. The CSV form carries an
// extra "Id" column so ids survive the round trip.
void write_dataset_csv(std::ostream& out, std::span<const QuestionRecord> records);
void write_dataset_json(std::ostream& out, std::span<const QuestionRecord> records);

// Throws DatasetError describing the first violated invariant.
void validate_record(const QuestionRecord& record);

// Splits a multi-answer cell on ';' and trims surrounding whitespace. Empty
// pieces are dropped.
std::vector<std::string> split_answers(std::string_view cell);

enum class DistractorPolicy { First, SeededUniform };

std::string_view to_string(DistractorPolicy p) noexcept;
DistractorPolicy parse_distractor_policy(std::string_view s);

// Picks the incorrect answer the persuasive agent defends. Pure in
// (record, policy, seed); the seeded draw is keyed by the record id.
const std::string& select_distractor(const QuestionRecord& record, DistractorPolicy policy,
                                     std::uint64_t seed);

}  // namespace cwpor
