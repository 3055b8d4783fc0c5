#include "isobank/generate.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "isobank/chat_client.hpp"
#include "isobank/physics.hpp"

namespace isobank {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Verb v) { return v == Verb::push ? "push" : "pull"; }

Verb verb_from_string(std::string_view s) {
  if (s == "push") return Verb::push;
  if (s == "pull") return Verb::pull;
  throw ParseError(fmt::format("unknown verb '{}'", s));
}

std::string ContextEntry::label() const { return fmt::format("{}/{}/{}", actor, object, surface); }

namespace {

bool has_digit(const std::string& s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

} // namespace

std::vector<std::string> check_context(const ContextEntry& ctx) {
  std::vector<std::string> out;
  const std::string who = ctx.label();
  for (const auto* f : {&ctx.actor, &ctx.object, &ctx.surface}) {
    if (f->empty())
      out.push_back(fmt::format("context '{}': empty actor/object/surface", who));
    else if (has_digit(*f))
      out.push_back(fmt::format("context '{}': contextual text must not contain digits ('{}')", who, *f));
  }
  if (!(ctx.mass_range_kg.lo < ctx.mass_range_kg.hi))
    out.push_back(fmt::format("context '{}': mass_range_kg lo must be < hi", who));
  if (!(ctx.mass_range_kg.lo > 0.0))
    out.push_back(fmt::format("context '{}': mass_range_kg must be positive", who));
  if (!(ctx.mu_range.lo < ctx.mu_range.hi))
    out.push_back(fmt::format("context '{}': mu_range lo must be < hi", who));
  if (!(ctx.mu_range.lo > 0.0 && ctx.mu_range.hi <= 1.2))
    out.push_back(fmt::format("context '{}': mu_range must lie within (0, 1.2]", who));
  if (!(ctx.angle_range_deg.lo < ctx.angle_range_deg.hi))
    out.push_back(fmt::format("context '{}': angle_range_deg lo must be < hi", who));
  if (!(ctx.angle_range_deg.lo >= 10.0 && ctx.angle_range_deg.hi <= 60.0))
    out.push_back(fmt::format("context '{}': angle_range_deg must lie within [10, 60]", who));
  return out;
}

// ---------------------------------------------------------------------------
// Context library I/O

namespace {

Range range_from_json(const json& j, const char* key) {
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 2)
    throw ParseError(fmt::format("{}: expected [lo, hi]", key));
  return {v[0], v[1]};
}

ContextEntry context_from_json(const json& j) {
  ContextEntry c;
  c.actor = j.at("actor").get<std::string>();
  c.object = j.at("object").get<std::string>();
  c.surface = j.at("surface").get<std::string>();
  c.verb = verb_from_string(j.at("verb").get<std::string>());
  c.direction = direction_from_string(j.at("direction").get<std::string>());
  c.mass_range_kg = range_from_json(j, "mass_range_kg");
  c.mu_range = range_from_json(j, "mu_range");
  if (j.contains("angle_range_deg"))
    c.angle_range_deg = range_from_json(j, "angle_range_deg");
  return c;
}

ojson context_to_json(const ContextEntry& c) {
  ojson j;
  j["actor"] = c.actor;
  j["object"] = c.object;
  j["surface"] = c.surface;
  j["verb"] = std::string(to_string(c.verb));
  j["direction"] = std::string(to_string(c.direction));
  j["mass_range_kg"] = {c.mass_range_kg.lo, c.mass_range_kg.hi};
  j["mu_range"] = {c.mu_range.lo, c.mu_range.hi};
  if (!(c.angle_range_deg == Range{10.0, 60.0}))
    j["angle_range_deg"] = {c.angle_range_deg.lo, c.angle_range_deg.hi};
  return j;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<ContextEntry> contexts_from_json(const json& arr) {
  if (!arr.is_array())
    throw ParseError("context library: expected a JSON array");
  std::vector<ContextEntry> out;
  std::vector<std::string> violations;
  for (size_t i = 0; i < arr.size(); ++i) {
    try {
      out.push_back(context_from_json(arr[i]));
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("contexts[{}]: {}", i, e.what()));
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("contexts[{}]: {}", i, e.what()));
    }
    for (auto& v : check_context(out.back()))
      violations.push_back(fmt::format("contexts[{}]: {}", i, v));
  }
  if (!violations.empty())
    throw InvariantError(std::move(violations));
  return out;
}

} // namespace

std::vector<ContextEntry> parse_context_library(std::string_view text) {
  const json doc = json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded())
    throw ParseError("context library is not valid JSON");
  return contexts_from_json(doc);
}

std::vector<ContextEntry> load_context_library(const std::filesystem::path& path) {
  return parse_context_library(read_file(path));
}

std::string serialize_context_library(const std::vector<ContextEntry>& contexts) {
  ojson arr = ojson::array();
  for (const auto& c : contexts)
    arr.push_back(context_to_json(c));
  return arr.dump(2) + "\n";
}

std::filesystem::path default_context_library() {
  return std::filesystem::path(ISOBANK_DATA_DIR) / "contexts.json";
}

GenSpec load_gen_spec(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw ParseError(fmt::format("{}: generation spec must be a JSON object", path.string()));
  GenSpec spec;
  try {
    spec.template_id = doc.value("template_id", spec.template_id);
    spec.bank_id = doc.value("bank_id", spec.bank_id);
    spec.topic = doc.value("topic", spec.topic);
    spec.n_items = doc.value("n_items", spec.n_items);
    spec.seed = doc.value("seed", spec.seed);
    spec.rounding_decimals = doc.value("rounding_decimals", spec.rounding_decimals);
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
  if (doc.contains("contexts")) {
    spec.contexts = contexts_from_json(doc["contexts"]);
  } else {
    std::filesystem::path lib = default_context_library();
    if (doc.contains("context_library")) {
      lib = doc["context_library"].get<std::string>();
      if (lib.is_relative())
        lib = path.parent_path() / lib;
    }
    spec.contexts = load_context_library(lib);
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Sampling

std::uint64_t item_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

double draw_rounded(Rng& rng, const Range& r, int decimals) {
  std::uniform_real_distribution<double> dist(r.lo, r.hi);
  return physics::round_to(dist(rng), decimals);
}

bool in_range(double v, const Range& r) { return v >= r.lo && v <= r.hi; }

// The params as the stem will present them: the unknown replaced by its displayed key.
StructuralParams with_displayed_key(StructuralParams p, int decimals) {
  const double key = physics::round_to(physics::solve_unknown(p), decimals);
  switch (p.unknown) {
  case Unknown::mass: p.mass_kg = key; break;
  case Unknown::force: p.force_N = key; break;
  case Unknown::mu: p.mu = key; break;
  }
  return p;
}

} // namespace

StructuralParams sample_structural(const ContextEntry& ctx, Rng& rng, int decimals) {
  if (auto v = check_context(ctx); !v.empty())
    throw InvariantError(std::move(v));
  std::uniform_int_distribution<int> pick_unknown(0, 2);
  for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
    StructuralParams p;
    p.direction = ctx.direction;
    p.mu = draw_rounded(rng, ctx.mu_range, decimals);
    p.mass_kg = draw_rounded(rng, ctx.mass_range_kg, decimals);
    p.angle_deg = draw_rounded(rng, ctx.angle_range_deg, decimals);
    p.unknown = static_cast<Unknown>(pick_unknown(rng));
    if (!in_range(p.mu, ctx.mu_range) || !in_range(p.mass_kg, ctx.mass_range_kg) ||
        !in_range(p.angle_deg, ctx.angle_range_deg))
      continue;
    try {
      p.force_N = physics::round_to(physics::required_force(p.mu, p.mass_kg, p.angle_deg, p.g, p.direction), decimals);
      if (!check_structural(p).empty())
        continue;
      if (!check_structural(with_displayed_key(p, decimals)).empty())
        continue;
    } catch (const DomainError&) {
      continue;
    }
    return p;
  }
  throw InfeasibleError(fmt::format("context '{}' ({}): no feasible draw in {} attempts", ctx.label(),
                                    to_string(ctx.direction), kMaxSampleAttempts));
}

// ---------------------------------------------------------------------------
// Rendering

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& fields) {
  std::string out;
  out.reserve(tmpl.size() + 64);
  size_t pos = 0;
  while (pos < tmpl.size()) {
    const size_t open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    const size_t close = tmpl.find('}', open);
    if (close == std::string_view::npos)
      throw TemplateError(fmt::format("unterminated placeholder at offset {}", open));
    out.append(tmpl.substr(pos, open - pos));
    const std::string name(tmpl.substr(open + 1, close - open - 1));
    auto it = fields.find(name);
    if (it == fields.end())
      throw TemplateError(fmt::format("template field '{}' has no value", name));
    out.append(it->second);
    pos = close + 1;
  }
  return out;
}

namespace {

std::string with_article(const std::string& noun, bool capital) {
  const bool vowel = !noun.empty() && std::string_view("aeiouAEIOU").find(noun[0]) != std::string_view::npos;
  std::string art = vowel ? "an" : "a";
  if (capital)
    art[0] = static_cast<char>(std::toupper(art[0]));
  return art + " " + noun;
}

std::string rounding_instruction(int decimals) {
  static const char* words[] = {"zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"};
  const std::string n = decimals >= 0 && decimals <= 10 ? words[decimals] : std::to_string(decimals);
  return fmt::format("Round your answers to {} decimal place{}.", n, decimals == 1 ? "" : "s");
}

std::string fmt_value(double v, int decimals) { return fmt::format("{:.{}f}", v, decimals); }

// Two stem layouts. Numeric phrases are fixed so verify() can re-read them:
//   friction "... is <mu>", "<m> kg", "<angle>°", "<F> N", "gravity is <g> m/s²".
struct Layout {
  const char* opening;
  const char* mu;
  const char* mass;
  const char* angle;
  const char* force;
};

constexpr Layout kLayouts[] = {
    {"{A_actor} is {verb_ing} {a_object} across the {surface} at a constant speed.",
     "The coefficient of kinetic friction between the {object} and the {surface} is {mu}.",
     "The {object} has a mass of {mass} kg.",
     "The {actor} {verbs} the {object} at an angle of {angle}° {tilt} the horizontal.",
     "The force applied by the {actor} is {force} N."},
    {"{A_actor} {verbs} {a_object} along the {surface} so that it slides at a steady speed.",
     "The kinetic friction coefficient between the {object} and the {surface} is {mu}.",
     "The mass of the {object} is {mass} kg.",
     "The {actor}'s force is directed at {angle}° {tilt} the horizontal.",
     "The {actor} exerts a force of {force} N."},
};

constexpr const char* kGravity = "The acceleration due to gravity is {g} m/s².";

std::string question(Unknown u) {
  switch (u) {
  case Unknown::mass: return "Calculate the mass of the {object} in kilograms.";
  case Unknown::force: return "Determine the force exerted by the {actor} in Newtons.";
  case Unknown::mu: return "Find the coefficient of kinetic friction between the {object} and the {surface}.";
  }
  return "";
}

std::vector<std::string> solution_steps(const StructuralParams& p, double key, int decimals) {
  const bool up = p.direction == Direction::upward;
  const char* sign = up ? "-" : "+";
  std::vector<std::string> steps;
  steps.push_back(fmt::format("The object moves at constant velocity, so the net force is zero. The applied force "
                              "makes an angle of {}° {} the horizontal.",
                              fmt_value(p.angle_deg, decimals), up ? "above" : "below"));
  steps.push_back(fmt::format("Vertical balance: N = m g {} F sin(theta).", sign));
  steps.push_back(fmt::format("Horizontal balance: F cos(theta) = mu N = mu (m g {} F sin(theta)).", sign));
  switch (p.unknown) {
  case Unknown::force:
    steps.push_back(fmt::format("Solve for F: F = mu m g / (cos(theta) {} mu sin(theta)).", up ? "+" : "-"));
    steps.push_back(fmt::format("F = {} N.", fmt_value(key, decimals)));
    break;
  case Unknown::mass:
    steps.push_back(fmt::format("Solve for m: m = F (cos(theta) {} mu sin(theta)) / (mu g).", up ? "+" : "-"));
    steps.push_back(fmt::format("m = {} kg.", fmt_value(key, decimals)));
    break;
  case Unknown::mu:
    steps.push_back(fmt::format("Solve for mu: mu = F cos(theta) / (m g {} F sin(theta)).", sign));
    steps.push_back(fmt::format("mu = {}.", fmt_value(key, decimals)));
    break;
  }
  return steps;
}

class AngledFrictionTemplate final : public ProblemTemplate {
public:
  std::string id() const override { return kAngledFrictionTemplate; }

  std::vector<std::string> check_context(const ContextEntry& ctx) const override { return isobank::check_context(ctx); }

  StructuralParams sample(const ContextEntry& ctx, Rng& rng, int decimals) const override {
    return sample_structural(ctx, rng, decimals);
  }

  ProblemItem render(const ContextEntry& ctx, const StructuralParams& params, const std::string& item_id,
                     int decimals, unsigned phrasing) const override {
    const StructuralParams shown = with_displayed_key(params, decimals);
    const double key = physics::round_to(physics::solve_unknown(params), decimals);

    std::map<std::string, std::string> fields{
        {"actor", ctx.actor},
        {"object", ctx.object},
        {"surface", ctx.surface},
        {"A_actor", with_article(ctx.actor, true)},
        {"a_object", with_article(ctx.object, false)},
        {"verb_ing", ctx.verb == Verb::push ? "pushing" : "pulling"},
        {"verbs", ctx.verb == Verb::push ? "pushes" : "pulls"},
        {"tilt", params.direction == Direction::upward ? "above" : "below"},
        {"mu", fmt_value(shown.mu, decimals)},
        {"mass", fmt_value(shown.mass_kg, decimals)},
        {"angle", fmt_value(shown.angle_deg, decimals)},
        {"force", fmt_value(shown.force_N, decimals)},
        {"g", fmt_value(shown.g, 2)},
    };

    const Layout& L = kLayouts[phrasing % std::size(kLayouts)];
    std::vector<std::string> parts{L.opening};
    if (params.unknown != Unknown::mu)
      parts.emplace_back(L.mu);
    if (params.unknown != Unknown::mass)
      parts.emplace_back(L.mass);
    parts.emplace_back(L.angle);
    if (params.unknown != Unknown::force)
      parts.emplace_back(L.force);
    parts.emplace_back(kGravity);
    parts.push_back(question(params.unknown));

    std::string stem;
    for (const auto& part : parts) {
      if (!stem.empty())
        stem += ' ';
      stem += fill_template(part, fields);
    }
    stem += ' ';
    stem += rounding_instruction(decimals);

    ProblemItem item;
    item.item_id = item_id;
    item.stem = std::move(stem);
    const char* unit = params.unknown == Unknown::mass ? "kg" : params.unknown == Unknown::force ? "N" : "";
    item.answer_key = NumericKey{key, unit, decimals};
    item.structural = shown;
    item.contextual = {{"actor", ctx.actor},
                       {"object", ctx.object},
                       {"surface", ctx.surface},
                       {"verb", std::string(to_string(ctx.verb))},
                       {"direction", std::string(to_string(ctx.direction))}};
    item.solution = solution_steps(shown, key, decimals);
    return item;
  }

  std::string verify(const ProblemItem& item) const override {
    const auto* key = std::get_if<NumericKey>(&item.answer_key);
    if (!key)
      return "answer key is not numeric";
    static const std::string num = R"((\d+(?:\.\d+)?))";
    static const std::regex mu_re("friction[^.]*? is " + num);
    static const std::regex mass_re(num + " kg\\b");
    static const std::regex angle_re(num + "°");
    static const std::regex force_re(num + " N\\b");
    static const std::regex g_re("gravity is " + num + " m/s");
    static const std::regex tilt_re(R"(° (above|below) the horizontal)");

    auto grab = [&](const std::regex& re) -> std::optional<double> {
      std::smatch m;
      if (!std::regex_search(item.stem, m, re))
        return std::nullopt;
      return std::stod(m[1].str());
    };

    StructuralParams p;
    const auto mu = grab(mu_re), mass = grab(mass_re), angle = grab(angle_re), force = grab(force_re),
               g = grab(g_re);
    std::smatch tilt;
    if (!angle || !g || !std::regex_search(item.stem, tilt, tilt_re))
      return "stem lacks angle, direction or gravity statement";
    const int missing = !mu + !mass + !force;
    if (missing != 1)
      return fmt::format("stem must state exactly two of mu/mass/force (missing {})", missing);
    p.unknown = !mu ? Unknown::mu : !mass ? Unknown::mass : Unknown::force;
    p.mu = mu.value_or(0.0);
    p.mass_kg = mass.value_or(0.0);
    p.force_N = force.value_or(0.0);
    p.angle_deg = *angle;
    p.g = *g;
    p.direction = tilt[1].str() == "above" ? Direction::upward : Direction::downward;

    double resolved = 0.0;
    try {
      resolved = physics::solve_unknown(p);
    } catch (const DomainError& e) {
      return fmt::format("re-solve failed: {}", e.what());
    }
    const double tol = 0.5 * std::pow(10.0, -key->decimals) + 1e-12;
    if (std::abs(resolved - key->value) > tol)
      return fmt::format("key {} differs from re-solved {} by more than {}", key->value, resolved, tol);
    return {};
  }
};

} // namespace

const ProblemTemplate& find_template(const std::string& template_id) {
  static const AngledFrictionTemplate angled;
  if (template_id == angled.id())
    return angled;
  throw ConfigError(fmt::format("unknown template '{}'", template_id));
}

ProblemItem render_item(const ContextEntry& ctx, const StructuralParams& params, const std::string& template_id,
                        const std::string& item_id, int decimals, unsigned phrasing) {
  return find_template(template_id).render(ctx, params, item_id, decimals, phrasing);
}

std::string verify_item(const ProblemItem& item) { return find_template(kAngledFrictionTemplate).verify(item); }

ProblemBank generate_bank(const GenSpec& spec) {
  const ProblemTemplate& tmpl = find_template(spec.template_id);
  std::vector<std::string> problems;
  if (spec.contexts.empty())
    problems.push_back("generation spec has no contexts");
  if (spec.n_items <= 0)
    problems.push_back("n_items must be positive");
  if (spec.rounding_decimals < 0 || spec.rounding_decimals > 6)
    problems.push_back("rounding_decimals must be within [0, 6]");
  for (const auto& ctx : spec.contexts)
    for (auto& v : tmpl.check_context(ctx))
      problems.push_back(std::move(v));
  if (!problems.empty())
    throw InvariantError(std::move(problems));

  ProblemBank bank;
  bank.bank_id = spec.bank_id;
  bank.topic = spec.topic;
  bank.question_type = QuestionType::NUM;
  bank.has_images = false;
  bank.items.reserve(static_cast<size_t>(spec.n_items));

  for (int i = 0; i < spec.n_items; ++i) {
    const ContextEntry& ctx = spec.contexts[static_cast<size_t>(i) % spec.contexts.size()];
    Rng rng(item_seed(spec.seed, static_cast<std::uint64_t>(i)));
    const StructuralParams params = tmpl.sample(ctx, rng, spec.rounding_decimals);
    const unsigned phrasing = static_cast<unsigned>(rng() % std::size(kLayouts));
    ProblemItem item = tmpl.render(ctx, params, fmt::format("q{}", i + 1), spec.rounding_decimals, phrasing);
    if (auto err = tmpl.verify(item); !err.empty())
      throw Error(fmt::format("verification failed for {}: {}", item.item_id, err));
    bank.items.push_back(std::move(item));
  }
  if (auto v = validate_bank(bank); !v.empty())
    throw InvariantError(std::move(v));
  return bank;
}

// ---------------------------------------------------------------------------
// Endpoint-backed context generation

ContextRequestResult request_contexts(ChatClient& client, const ModelEndpoint& endpoint, int count,
                                      const std::vector<ContextEntry>& examples) {
  std::string prompt = fmt::format(
      "Generate {} realistic scenarios of a person, animal or machine pushing or pulling an object across a rough "
      "surface at constant speed with a single angled force. Respond with only a JSON array. Each element must have "
      "the keys \"actor\", \"object\", \"surface\" (plain words, no digits), \"verb\" (\"push\" or \"pull\"), "
      "\"direction\" (\"upward\" or \"downward\"), \"mass_range_kg\" ([lo, hi]) and \"mu_range\" ([lo, hi] with "
      "0 < lo < hi <= 1.2), with ranges realistic for the object and surface.",
      count);
  if (!examples.empty())
    prompt += "\nExamples:\n" + serialize_context_library(examples);

  ContextRequestResult result;
  const ChatReply reply = client.complete(endpoint, {{"user", prompt}});
  if (!reply.ok) {
    result.rejected.push_back(fmt::format("request failed: {}", reply.error));
    return result;
  }
  const auto open = reply.content.find('[');
  const auto close = reply.content.rfind(']');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    result.rejected.push_back("reply contains no JSON array");
    return result;
  }
  const json arr = json::parse(reply.content.substr(open, close - open + 1), nullptr, false);
  if (arr.is_discarded() || !arr.is_array()) {
    result.rejected.push_back("reply array is not valid JSON");
    return result;
  }
  for (size_t i = 0; i < arr.size(); ++i) {
    try {
      ContextEntry c = context_from_json(arr[i]);
      auto v = check_context(c);
      if (!v.empty()) {
        result.rejected.push_back(fmt::format("record {}: {}", i, v.front()));
        continue;
      }
      result.accepted.push_back(std::move(c));
    } catch (const std::exception& e) {
      result.rejected.push_back(fmt::format("record {}: {}", i, e.what()));
    }
  }
  return result;
}

} // namespace isobank
