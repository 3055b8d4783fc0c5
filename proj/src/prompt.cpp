#include <regex>

#include <fmt/format.h>
#include <json.hpp>

#include "isobank/eval.hpp"

namespace isobank {

using json = nlohmann::json;

const char* const kSolverSystemPrompt =
    "You are an expert Physics Solver. Your goal is to provide a correct, clear, step-by-step solution to the "
    "problem.\n"
    "\n"
    "Guidelines:\n"
    "- Identify the physical principles involved (e.g., Newton's Laws).\n"
    "- Show your algebraic work before plugging in numbers.\n"
    "- State the final answer clearly.\n"
    "\n"
    "Respond with valid JSON format\n"
    "{\"reasoning\": \"<detailed solution>\", \"answer\": \"<number / choice >\"}";

SolverPrompt build_prompt(const ProblemItem& item) {
  SolverPrompt p;
  p.system = kSolverSystemPrompt;
  switch (key_type(item.answer_key)) {
  case QuestionType::NUM:
    p.user = item.stem;
    break;
  case QuestionType::MCQ: {
    const auto& key = std::get<ChoiceKey>(item.answer_key);
    p.user = item.stem + "\n";
    for (const auto& o : key.options)
      p.user += fmt::format("\n{}) {}", o.label, o.text);
    break;
  }
  default:
    throw UnsupportedTypeError(fmt::format("item '{}': only NUM and MCQ items can be posed to a solver (got {})",
                                           item.item_id, to_string(key_type(item.answer_key))));
  }
  return p;
}

std::string_view to_string(ParseStatus s) {
  switch (s) {
  case ParseStatus::ok: return "ok";
  case ParseStatus::repaired: return "repaired";
  case ParseStatus::failed: return "failed";
  }
  return "failed";
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string value_text(const json& v) {
  if (v.is_string())
    return trim(v.get<std::string>());
  if (v.is_number())
    return v.dump();
  return {};
}

// Fills `out` from an object with a non-empty "answer". False otherwise.
bool take_object(const json& j, SolverResponse& out) {
  if (!j.is_object() || !j.contains("answer"))
    return false;
  std::string answer = value_text(j["answer"]);
  if (answer.empty())
    return false;
  out.answer = std::move(answer);
  if (j.contains("reasoning"))
    out.reasoning = j["reasoning"].is_string() ? j["reasoning"].get<std::string>() : j["reasoning"].dump();
  return true;
}

std::string strip_fences(std::string_view text) {
  std::string out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos)
      eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    const auto first = line.find_first_not_of(" \t");
    if (!(first != std::string_view::npos && line.substr(first).rfind("```", 0) == 0)) {
      out.append(line);
      out.push_back('\n');
    }
    pos = eol + 1;
  }
  return out;
}

// Top-level balanced {...} spans, string literals respected.
std::vector<std::pair<size_t, size_t>> brace_blocks(const std::string& s) {
  std::vector<std::pair<size_t, size_t>> blocks;
  int depth = 0;
  bool in_str = false, esc = false;
  size_t start = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_str) {
      if (esc) esc = false;
      else if (c == '\\') esc = true;
      else if (c == '"') in_str = false;
      continue;
    }
    if (c == '"' && depth > 0) {
      in_str = true;
    } else if (c == '{') {
      if (depth++ == 0)
        start = i;
    } else if (c == '}' && depth > 0) {
      if (--depth == 0)
        blocks.emplace_back(start, i + 1);
    }
  }
  return blocks;
}

} // namespace

SolverResponse parse_answer(std::string_view raw_text) {
  SolverResponse out;
  out.raw_text = std::string(raw_text);

  const json whole = json::parse(raw_text.begin(), raw_text.end(), nullptr, false);
  if (!whole.is_discarded() && take_object(whole, out)) {
    out.parse_status = ParseStatus::ok;
    return out;
  }

  const std::string cleaned = strip_fences(raw_text);
  const auto blocks = brace_blocks(cleaned);
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    const json j = json::parse(cleaned.substr(it->first, it->second - it->first), nullptr, false);
    if (!j.is_discarded() && take_object(j, out)) {
      out.parse_status = ParseStatus::repaired;
      return out;
    }
  }

  static const std::regex answer_re(R"re("answer"\s*:\s*(?:"((?:[^"\\]|\\.)*)"|(-?[0-9][0-9.eE+\-]*)))re");
  std::string last;
  for (std::sregex_iterator it(out.raw_text.begin(), out.raw_text.end(), answer_re), end; it != end; ++it) {
    std::string v = (*it)[1].matched ? (*it)[1].str() : (*it)[2].str();
    if (!trim(v).empty())
      last = trim(v);
  }
  if (!last.empty()) {
    out.answer = last;
    out.parse_status = ParseStatus::repaired;
    return out;
  }
  out.parse_status = ParseStatus::failed;
  return out;
}

} // namespace isobank
