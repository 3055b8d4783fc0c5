#include "isobank/ingest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace isobank {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// RFC 4180 fields for one physical line; quoted fields may not span lines here.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t lineno) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false, was_quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && trim(cur).empty()) {
      quoted = was_quoted = true;
      cur.clear();
    } else if (c == ',') {
      fields.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(c);
    }
  }
  if (quoted)
    throw ParseError(fmt::format("line {}: unterminated quoted field", lineno));
  fields.push_back(was_quoted ? cur : trim(cur));
  return fields;
}

bool parse_correct(const std::string& v, std::size_t lineno) {
  if (v == "1" || v == "true" || v == "TRUE")
    return true;
  if (v == "0" || v == "false" || v == "FALSE")
    return false;
  throw ParseError(fmt::format("line {}: correct must be 0 or 1 (got '{}')", lineno, v));
}

} // namespace

IngestResult parse_student_csv(std::string_view text, const std::map<std::string, ProblemBank>& banks, bool strict) {
  IngestResult result;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;

  // header
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0)
      line.erase(0, 3);
    if (trim(line).empty())
      continue;
    const auto h = split_csv_line(line, lineno);
    if (h != std::vector<std::string>{"student_id", "bank_id", "item_id", "correct"})
      throw ParseError(fmt::format("line {}: expected header 'student_id,bank_id,item_id,correct'", lineno));
    have_header = true;
    break;
  }
  if (!have_header)
    throw ParseError("student CSV is empty (no header)");

  const std::string ts = utc_timestamp_now();
  std::set<std::pair<std::string, std::string>> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty())
      continue;
    const auto f = split_csv_line(line, lineno);
    if (f.size() != 4)
      throw ParseError(fmt::format("line {}: expected 4 fields, got {}", lineno, f.size()));
    ++result.input_rows;
    StudentResponseRow row{f[0], f[1], f[2], parse_correct(f[3], lineno)};
    if (row.student_id.empty())
      throw ParseError(fmt::format("line {}: empty student_id", lineno));

    auto bank = banks.find(row.bank_id);
    if (bank == banks.end()) {
      result.rejections.push_back({lineno, fmt::format("unknown bank_id '{}'", row.bank_id)});
      continue;
    }
    if (!bank->second.find_item(row.item_id)) {
      result.rejections.push_back(
          {lineno, fmt::format("item_id '{}' not in bank '{}'", row.item_id, row.bank_id)});
      continue;
    }
    if (!seen.emplace(row.student_id, row.bank_id).second) {
      result.rejections.push_back(
          {lineno, fmt::format("duplicate row for student '{}' in bank '{}'", row.student_id, row.bank_id)});
      continue;
    }
    ResponseRecord rec;
    rec.responder_id = row.student_id;
    rec.responder_kind = ResponderKind::student;
    rec.bank_id = row.bank_id;
    rec.item_id = row.item_id;
    rec.attempt = 1;
    rec.correct = row.correct;
    rec.timestamp = ts;
    result.records.push_back(std::move(rec));
  }

  if (strict && !result.rejections.empty()) {
    std::vector<std::string> v;
    for (const auto& r : result.rejections)
      v.push_back(fmt::format("line {}: {}", r.line, r.reason));
    throw InvariantError(std::move(v));
  }
  return result;
}

IngestResult load_student_csv(const std::filesystem::path& path, const std::map<std::string, ProblemBank>& banks,
                              bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError(fmt::format("cannot read student CSV '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_student_csv(ss.str(), banks, strict);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

} // namespace isobank
