#include "isobank/bank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace isobank {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

InvariantError::InvariantError(std::vector<std::string> violations)
    : Error([&] {
        std::string msg = fmt::format("{} invariant violation(s):", violations.size());
        for (const auto& v : violations)
          msg += "\n  - " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

std::string_view to_string(QuestionType t) {
  switch (t) {
  case QuestionType::NUM: return "NUM";
  case QuestionType::MCQ: return "MCQ";
  case QuestionType::MA: return "MA";
  case QuestionType::CAT: return "CAT";
  }
  return "?";
}

QuestionType question_type_from_string(std::string_view s) {
  if (s == "NUM") return QuestionType::NUM;
  if (s == "MCQ") return QuestionType::MCQ;
  if (s == "MA") return QuestionType::MA;
  if (s == "CAT") return QuestionType::CAT;
  throw ParseError(fmt::format("unknown question_type '{}'", s));
}

std::string_view to_string(Direction d) { return d == Direction::upward ? "upward" : "downward"; }

std::string_view to_string(Unknown u) {
  switch (u) {
  case Unknown::mass: return "mass";
  case Unknown::force: return "force";
  case Unknown::mu: return "mu";
  }
  return "?";
}

Direction direction_from_string(std::string_view s) {
  if (s == "upward") return Direction::upward;
  if (s == "downward") return Direction::downward;
  throw ParseError(fmt::format("unknown direction '{}'", s));
}

Unknown unknown_from_string(std::string_view s) {
  if (s == "mass") return Unknown::mass;
  if (s == "force") return Unknown::force;
  if (s == "mu") return Unknown::mu;
  throw ParseError(fmt::format("unknown 'unknown' value '{}' (angle is never the unknown)", s));
}

std::vector<std::string> check_structural(const StructuralParams& p) {
  std::vector<std::string> out;
  if (!(p.angle_deg >= 10.0 && p.angle_deg <= 60.0))
    out.push_back(fmt::format("angle_deg {} outside [10, 60]", p.angle_deg));
  if (!(p.force_N > 0.0))
    out.push_back(fmt::format("force_N {} not positive", p.force_N));
  if (!(p.mu > 0.0 && p.mu < 1.2))
    out.push_back(fmt::format("mu {} outside (0, 1.2)", p.mu));
  if (!(p.mass_kg > 0.0))
    out.push_back(fmt::format("mass_kg {} not positive", p.mass_kg));
  if (!(p.g > 0.0))
    out.push_back(fmt::format("g {} not positive", p.g));
  if (p.direction == Direction::downward) {
    const double th = p.angle_deg * M_PI / 180.0;
    if (!(std::cos(th) > p.mu * std::sin(th)))
      out.push_back("downward force infeasible: cos(angle) <= mu*sin(angle)");
  }
  return out;
}

QuestionType key_type(const AnswerKey& key) {
  switch (key.index()) {
  case 0: return QuestionType::NUM;
  case 1: return QuestionType::MCQ;
  case 2: return QuestionType::MA;
  default: return QuestionType::CAT;
  }
}

const ProblemItem* ProblemBank::find_item(std::string_view item_id) const {
  for (const auto& it : items)
    if (it.item_id == item_id)
      return &it;
  return nullptr;
}

namespace {

// "Round your answers to two decimal places" -> 2. nullopt when the stem carries no instruction.
std::optional<int> stated_decimals(const std::string& stem) {
  static const std::regex re(R"(to\s+(\w+)\s+decimal\s+place)", std::regex::icase);
  std::smatch m;
  if (!std::regex_search(stem, m, re))
    return std::nullopt;
  static const std::vector<std::string> words = {"zero", "one", "two",   "three", "four", "five",
                                                 "six",  "seven", "eight", "nine",  "ten"};
  std::string w = m[1].str();
  std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return std::tolower(c); });
  for (size_t i = 0; i < words.size(); ++i)
    if (words[i] == w)
      return static_cast<int>(i);
  if (!w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char c) { return std::isdigit(c); }))
    return std::stoi(w);
  return std::nullopt;
}

void check_key(const ProblemItem& item, std::vector<std::string>& out) {
  const auto& id = item.item_id;
  if (const auto* num = std::get_if<NumericKey>(&item.answer_key)) {
    if (num->decimals < 0)
      out.push_back(fmt::format("item '{}': answer_key.decimals {} is negative", id, num->decimals));
    if (!std::isfinite(num->value))
      out.push_back(fmt::format("item '{}': answer_key.value is not finite", id));
    if (auto d = stated_decimals(item.stem); d && *d != num->decimals)
      out.push_back(fmt::format("item '{}': answer_key.decimals {} disagrees with stem rounding instruction ({})",
                                id, num->decimals, *d));
  } else if (const auto* ch = std::get_if<ChoiceKey>(&item.answer_key)) {
    std::set<std::string> labels;
    for (const auto& o : ch->options)
      if (!labels.insert(o.label).second)
        out.push_back(fmt::format("item '{}': answer_key.options has duplicate label '{}'", id, o.label));
    if (!labels.count(ch->correct_label))
      out.push_back(fmt::format("item '{}': answer_key.correct_label '{}' not among option labels", id,
                                ch->correct_label));
  } else if (const auto* ma = std::get_if<MultiAnswerKey>(&item.answer_key)) {
    std::set<std::string> labels;
    for (const auto& o : ma->options)
      labels.insert(o.label);
    for (const auto& l : ma->correct_labels)
      if (!labels.count(l))
        out.push_back(fmt::format("item '{}': answer_key.correct_labels entry '{}' not among option labels", id, l));
  } else if (const auto* cat = std::get_if<CategoryKey>(&item.answer_key)) {
    if (cat->assignment.empty())
      out.push_back(fmt::format("item '{}': answer_key.assignment is empty", id));
  }
}

} // namespace

std::vector<std::string> validate_bank(const ProblemBank& bank) {
  std::vector<std::string> out;
  if (bank.bank_id.empty())
    out.push_back("bank: bank_id is empty");
  if (bank.items.empty())
    out.push_back(fmt::format("bank '{}': items list is empty", bank.bank_id));
  std::set<std::string> seen;
  for (size_t i = 0; i < bank.items.size(); ++i) {
    const auto& item = bank.items[i];
    const std::string id = item.item_id.empty() ? fmt::format("#{}", i) : item.item_id;
    if (item.item_id.empty())
      out.push_back(fmt::format("item '{}': item_id is empty", id));
    else if (!seen.insert(item.item_id).second)
      out.push_back(fmt::format("item '{}': item_id not unique within bank", id));
    if (item.stem.empty())
      out.push_back(fmt::format("item '{}': stem is empty", id));
    if (key_type(item.answer_key) != bank.question_type)
      out.push_back(fmt::format("item '{}': answer_key type {} does not match bank question_type {}", id,
                                to_string(key_type(item.answer_key)), to_string(bank.question_type)));
    check_key(item, out);
    if (item.structural)
      for (const auto& v : check_structural(*item.structural))
        out.push_back(fmt::format("item '{}': structural: {}", id, v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

ojson options_to_json(const std::vector<ChoiceOption>& options) {
  ojson arr = ojson::array();
  for (const auto& o : options)
    arr.push_back(ojson{{"label", o.label}, {"text", o.text}});
  return arr;
}

ojson key_to_json(const AnswerKey& key) {
  return std::visit(
      [](const auto& k) -> ojson {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, NumericKey>) {
          return ojson{{"kind", "numeric"}, {"value", k.value}, {"unit", k.unit}, {"decimals", k.decimals}};
        } else if constexpr (std::is_same_v<T, ChoiceKey>) {
          return ojson{{"kind", "choice"}, {"correct_label", k.correct_label}, {"options", options_to_json(k.options)}};
        } else if constexpr (std::is_same_v<T, MultiAnswerKey>) {
          return ojson{{"kind", "multi_answer"},
                       {"correct_labels", k.correct_labels},
                       {"options", options_to_json(k.options)}};
        } else {
          ojson a = ojson::object();
          for (const auto& [entry, cat] : k.assignment)
            a[entry] = cat;
          return ojson{{"kind", "category"}, {"assignment", a}};
        }
      },
      key);
}

ojson structural_to_json(const StructuralParams& p) {
  return ojson{{"mu", p.mu},
               {"mass_kg", p.mass_kg},
               {"angle_deg", p.angle_deg},
               {"force_N", p.force_N},
               {"g", p.g},
               {"direction", std::string(to_string(p.direction))},
               {"unknown", std::string(to_string(p.unknown))}};
}

// Typed field access that reports a dotted path on failure.
class Reader {
public:
  Reader(std::vector<std::string>* warnings) : warnings_(warnings) {}

  const json& field(const json& obj, const std::string& key, const std::string& path) const {
    auto it = obj.find(key);
    if (it == obj.end())
      throw ParseError(fmt::format("{}: missing required field '{}'", path, key));
    return *it;
  }

  template <typename T> T get(const json& obj, const std::string& key, const std::string& path) const {
    const json& v = field(obj, key, path);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ParseError(fmt::format("{}.{}: wrong type ({})", path, key, v.type_name()));
    }
  }

  void expect_object(const json& v, const std::string& path) const {
    if (!v.is_object())
      throw ParseError(fmt::format("{}: expected object, got {}", path, v.type_name()));
  }

  void warn_extra(const json& obj, std::initializer_list<std::string_view> known, const std::string& path) const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find(known.begin(), known.end(), it.key()) == known.end() && warnings_)
        warnings_->push_back(fmt::format("{}: ignoring unknown key '{}'", path, it.key()));
    }
  }

private:
  std::vector<std::string>* warnings_;
};

std::vector<ChoiceOption> options_from_json(const Reader& r, const json& obj, const std::string& path) {
  const json& arr = r.field(obj, "options", path);
  if (!arr.is_array())
    throw ParseError(fmt::format("{}.options: expected array", path));
  std::vector<ChoiceOption> out;
  for (size_t i = 0; i < arr.size(); ++i) {
    const std::string p = fmt::format("{}.options[{}]", path, i);
    r.expect_object(arr[i], p);
    r.warn_extra(arr[i], {"label", "text"}, p);
    out.push_back({r.get<std::string>(arr[i], "label", p), r.get<std::string>(arr[i], "text", p)});
  }
  return out;
}

AnswerKey key_from_json(const Reader& r, const json& obj, const std::string& path) {
  r.expect_object(obj, path);
  const auto kind = r.get<std::string>(obj, "kind", path);
  if (kind == "numeric") {
    r.warn_extra(obj, {"kind", "value", "unit", "decimals"}, path);
    NumericKey k;
    k.value = r.get<double>(obj, "value", path);
    k.unit = obj.contains("unit") ? r.get<std::string>(obj, "unit", path) : "";
    k.decimals = r.get<int>(obj, "decimals", path);
    return k;
  }
  if (kind == "choice") {
    r.warn_extra(obj, {"kind", "correct_label", "options"}, path);
    return ChoiceKey{r.get<std::string>(obj, "correct_label", path), options_from_json(r, obj, path)};
  }
  if (kind == "multi_answer") {
    r.warn_extra(obj, {"kind", "correct_labels", "options"}, path);
    MultiAnswerKey k;
    k.correct_labels = r.get<std::vector<std::string>>(obj, "correct_labels", path);
    std::sort(k.correct_labels.begin(), k.correct_labels.end());
    k.correct_labels.erase(std::unique(k.correct_labels.begin(), k.correct_labels.end()), k.correct_labels.end());
    k.options = options_from_json(r, obj, path);
    return k;
  }
  if (kind == "category") {
    r.warn_extra(obj, {"kind", "assignment"}, path);
    return CategoryKey{r.get<std::map<std::string, std::string>>(obj, "assignment", path)};
  }
  throw ParseError(fmt::format("{}.kind: unknown answer key kind '{}'", path, kind));
}

StructuralParams structural_from_json(const Reader& r, const json& obj, const std::string& path) {
  r.expect_object(obj, path);
  r.warn_extra(obj, {"mu", "mass_kg", "angle_deg", "force_N", "g", "direction", "unknown"}, path);
  StructuralParams p;
  p.mu = r.get<double>(obj, "mu", path);
  p.mass_kg = r.get<double>(obj, "mass_kg", path);
  p.angle_deg = r.get<double>(obj, "angle_deg", path);
  p.force_N = r.get<double>(obj, "force_N", path);
  p.g = obj.contains("g") ? r.get<double>(obj, "g", path) : kStandardGravity;
  try {
    p.direction = direction_from_string(r.get<std::string>(obj, "direction", path));
    p.unknown = unknown_from_string(r.get<std::string>(obj, "unknown", path));
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path, e.what()));
  }
  return p;
}

size_t line_of(std::string_view text, size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

} // namespace

std::string serialize_bank(const ProblemBank& bank) {
  ojson doc;
  doc["bank_id"] = bank.bank_id;
  doc["topic"] = bank.topic;
  doc["question_type"] = std::string(to_string(bank.question_type));
  doc["has_images"] = bank.has_images;
  ojson items = ojson::array();
  for (const auto& it : bank.items) {
    ojson j;
    j["item_id"] = it.item_id;
    j["stem"] = it.stem;
    j["answer_key"] = key_to_json(it.answer_key);
    if (it.structural)
      j["structural"] = structural_to_json(*it.structural);
    if (!it.contextual.empty()) {
      ojson c = ojson::object();
      for (const auto& [k, v] : it.contextual)
        c[k] = v;
      j["contextual"] = c;
    }
    if (!it.solution.empty())
      j["solution"] = it.solution;
    items.push_back(std::move(j));
  }
  doc["items"] = std::move(items);
  return doc.dump(2) + "\n";
}

void save_bank(const ProblemBank& bank, const std::filesystem::path& path) {
  const std::string text = serialize_bank(bank);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << text;
  if (!out)
    throw IoError(fmt::format("failed writing '{}'", path.string()));
}

ProblemBank parse_bank(std::string_view text, std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("line {}: {}", line_of(text, e.byte), e.what()));
  }
  Reader r(warnings);
  r.expect_object(doc, "bank");
  r.warn_extra(doc, {"bank_id", "topic", "question_type", "has_images", "items"}, "bank");

  ProblemBank bank;
  bank.bank_id = r.get<std::string>(doc, "bank_id", "bank");
  bank.topic = doc.contains("topic") ? r.get<std::string>(doc, "topic", "bank") : "";
  bank.question_type = question_type_from_string(r.get<std::string>(doc, "question_type", "bank"));
  bank.has_images = doc.contains("has_images") ? r.get<bool>(doc, "has_images", "bank") : false;

  const json& items = r.field(doc, "items", "bank");
  if (!items.is_array())
    throw ParseError("bank.items: expected array");
  for (size_t i = 0; i < items.size(); ++i) {
    const std::string path = fmt::format("items[{}]", i);
    const json& j = items[i];
    r.expect_object(j, path);
    r.warn_extra(j, {"item_id", "stem", "answer_key", "structural", "contextual", "solution"}, path);
    ProblemItem item;
    item.item_id = r.get<std::string>(j, "item_id", path);
    item.stem = r.get<std::string>(j, "stem", path);
    item.answer_key = key_from_json(r, r.field(j, "answer_key", path), path + ".answer_key");
    if (j.contains("structural"))
      item.structural = structural_from_json(r, j["structural"], path + ".structural");
    if (j.contains("contextual"))
      item.contextual = r.get<std::map<std::string, std::string>>(j, "contextual", path);
    if (j.contains("solution"))
      item.solution = r.get<std::vector<std::string>>(j, "solution", path);
    bank.items.push_back(std::move(item));
  }

  if (auto violations = validate_bank(bank); !violations.empty())
    throw InvariantError(std::move(violations));
  return bank;
}

ProblemBank load_bank(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError(fmt::format("cannot read bank file '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_bank(ss.str(), warnings);
  } catch (const InvariantError&) {
    throw;
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::map<std::string, ProblemBank> load_bank_dir(const std::filesystem::path& dir,
                                                 std::vector<std::string>* warnings) {
  if (!std::filesystem::is_directory(dir))
    throw IoError(fmt::format("bank directory '{}' does not exist", dir.string()));
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json")
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::map<std::string, ProblemBank> out;
  for (const auto& f : files) {
    auto bank = load_bank(f, warnings);
    const std::string id = bank.bank_id;
    if (!out.emplace(id, std::move(bank)).second)
      throw InvariantError({fmt::format("bank_id '{}' appears in more than one file (second: {})", id, f.string())});
  }
  return out;
}

} // namespace isobank
