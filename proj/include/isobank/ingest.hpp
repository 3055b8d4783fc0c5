#pragma once

// Student gradebook import. CSV header: student_id,bank_id,item_id,correct

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "isobank/bank.hpp"
#include "isobank/store.hpp"

namespace isobank {

struct StudentResponseRow {
  std::string student_id;
  std::string bank_id;
  std::string item_id;
  bool correct = false;
};

struct IngestRejection {
  std::size_t line = 0; // 1-based, header is line 1
  std::string reason;
};

struct IngestResult {
  std::vector<ResponseRecord> records;
  std::vector<IngestRejection> rejections;
  std::size_t input_rows = 0;
};

// Malformed CSV throws ParseError. Rows naming an unknown bank/item, or repeating a
// (student, bank) pair, are rejected; with `strict` any rejection throws InvariantError.
IngestResult load_student_csv(const std::filesystem::path& path, const std::map<std::string, ProblemBank>& banks,
                              bool strict = false);
IngestResult parse_student_csv(std::string_view text, const std::map<std::string, ProblemBank>& banks,
                               bool strict = false);

} // namespace isobank
