#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

#include <fmt/format.h>

#include "isobank/eval.hpp"

namespace isobank {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string normalize_label(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')')
    s = s.substr(1, s.size() - 2);
  while (!s.empty() && (s.back() == ')' || s.back() == '.' || s.back() == ':'))
    s.pop_back();
  return lower(trim(s));
}

bool grade_choice(const ChoiceKey& key, std::string_view answer) {
  const std::string a = trim(answer);
  const std::string label = normalize_label(a);
  for (const auto& o : key.options)
    if (lower(o.label) == label)
      return o.label == key.correct_label;
  // "B) some text" or "B. some text"
  static const std::regex prefixed(R"(^\(?([A-Za-z0-9]+)[).:]\s+.*$)");
  std::smatch m;
  if (std::regex_match(a, m, prefixed)) {
    const std::string l = lower(m[1].str());
    for (const auto& o : key.options)
      if (lower(o.label) == l)
        return o.label == key.correct_label;
  }
  const std::string text = lower(a);
  for (const auto& o : key.options)
    if (lower(trim(o.text)) == text)
      return o.label == key.correct_label;
  return false;
}

} // namespace

std::optional<double> extract_number(std::string_view text) {
  std::string s(text);
  // thousands separators: a comma between digits followed by exactly three digits
  static const std::regex thousands(R"((\d),(\d{3})(?!\d))");
  std::string prev;
  do {
    prev = s;
    s = std::regex_replace(s, thousands, "$1$2");
  } while (s != prev);
  // U+2212 minus sign
  for (size_t p; (p = s.find("\xe2\x88\x92")) != std::string::npos;)
    s.replace(p, 3, "-");
  static const std::regex number(R"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)");
  std::smatch m;
  if (!std::regex_search(s, m, number))
    return std::nullopt;
  try {
    return std::stod(m.str());
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

double numeric_tolerance(const NumericKey& key) {
  return std::max(0.5 * std::pow(10.0, -key.decimals) + 1e-9, 0.01 * std::abs(key.value));
}

bool grade(const ProblemItem& item, std::string_view answer_text) {
  if (const auto* num = std::get_if<NumericKey>(&item.answer_key)) {
    const auto x = extract_number(answer_text);
    if (!x || !std::isfinite(*x))
      return false;
    return std::abs(*x - num->value) <= numeric_tolerance(*num);
  }
  if (const auto* ch = std::get_if<ChoiceKey>(&item.answer_key))
    return grade_choice(*ch, answer_text);
  throw UnsupportedTypeError(fmt::format("item '{}': grading {} items is not supported", item.item_id,
                                         to_string(key_type(item.answer_key))));
}

} // namespace isobank
