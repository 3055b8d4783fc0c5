#pragma once

// Problem bank data model and the on-disk bank file format.
//
// A bank is one JSON document:
//   { "bank_id", "topic", "question_type": "NUM"|"MCQ"|"MA"|"CAT",
//     "has_images", "items": [ { "item_id", "stem", "answer_key": {"kind": ...},
//                                "structural"?, "contextual"?, "solution"? } ] }
// Unknown answer_key kinds are rejected; unknown extra keys produce warnings.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "isobank/error.hpp"

namespace isobank {

enum class QuestionType { NUM, MCQ, MA, CAT };

std::string_view to_string(QuestionType t);
QuestionType question_type_from_string(std::string_view s);

enum class Direction { upward, downward };
enum class Unknown { mass, force, mu };

std::string_view to_string(Direction d);
std::string_view to_string(Unknown u);
Direction direction_from_string(std::string_view s);
Unknown unknown_from_string(std::string_view s);

inline constexpr double kStandardGravity = 9.81;

// Physical quantities for one angled-force-with-friction variant.
struct StructuralParams {
  double mu = 0.0;        // kinetic friction coefficient
  double mass_kg = 0.0;
  double angle_deg = 0.0; // from horizontal
  double force_N = 0.0;
  double g = kStandardGravity;
  Direction direction = Direction::upward;
  Unknown unknown = Unknown::mass;

  bool operator==(const StructuralParams&) const = default;
};

// Empty when every invariant holds.
std::vector<std::string> check_structural(const StructuralParams& p);

struct NumericKey {
  double value = 0.0;
  std::string unit;
  int decimals = 2;
  bool operator==(const NumericKey&) const = default;
};

struct ChoiceOption {
  std::string label;
  std::string text;
  bool operator==(const ChoiceOption&) const = default;
};

struct ChoiceKey {
  std::string correct_label;
  std::vector<ChoiceOption> options;
  bool operator==(const ChoiceKey&) const = default;
};

struct MultiAnswerKey {
  std::vector<std::string> correct_labels; // treated as a set; kept sorted
  std::vector<ChoiceOption> options;
  bool operator==(const MultiAnswerKey&) const = default;
};

struct CategoryKey {
  std::map<std::string, std::string> assignment; // entry -> category
  bool operator==(const CategoryKey&) const = default;
};

using AnswerKey = std::variant<NumericKey, ChoiceKey, MultiAnswerKey, CategoryKey>;

// The question type an answer key variant belongs to.
QuestionType key_type(const AnswerKey& key);

struct ProblemItem {
  std::string item_id;
  std::string stem;
  AnswerKey answer_key;
  std::optional<StructuralParams> structural;
  std::map<std::string, std::string> contextual;
  std::vector<std::string> solution;

  bool operator==(const ProblemItem&) const = default;
};

struct ProblemBank {
  std::string bank_id;
  std::string topic;
  QuestionType question_type = QuestionType::NUM;
  bool has_images = false;
  std::vector<ProblemItem> items;

  bool operator==(const ProblemBank&) const = default;

  const ProblemItem* find_item(std::string_view item_id) const;
};

// Every invariant violation in the bank, each naming the item and field involved.
std::vector<std::string> validate_bank(const ProblemBank& bank);

// Parses and validates a bank file. Warnings about ignored keys go to `warnings` when given.
ProblemBank load_bank(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);
ProblemBank parse_bank(std::string_view text, std::vector<std::string>* warnings = nullptr);

// Byte-stable serialization: fixed key order, two-space indent, trailing newline.
std::string serialize_bank(const ProblemBank& bank);
void save_bank(const ProblemBank& bank, const std::filesystem::path& path);

// Loads every *.json bank in a directory, keyed by bank_id.
std::map<std::string, ProblemBank> load_bank_dir(const std::filesystem::path& dir,
                                                 std::vector<std::string>* warnings = nullptr);

} // namespace isobank
