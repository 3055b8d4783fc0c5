#pragma once

// Constraint-driven generation of isomorphic variants.
//
// The pipeline per item: pick a context (round-robin), draw structural values
// inside the context's ranges, round them to the displayed precision, derive the
// force from the rounded values, choose the unknown, compose the stem, compute the
// key from the displayed values, then re-read the stem and re-solve as a check.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "isobank/bank.hpp"

namespace isobank {

class ChatClient;
struct ModelEndpoint;

enum class Verb { push, pull };

std::string_view to_string(Verb v);
Verb verb_from_string(std::string_view s);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Range&) const = default;
};

struct ContextEntry {
  std::string actor;   // "traveler"
  std::string object;  // "backpack"
  std::string surface; // "asphalt road"
  Verb verb = Verb::pull;
  Direction direction = Direction::upward;
  Range mass_range_kg;
  Range mu_range;
  Range angle_range_deg{10.0, 60.0}; // optional in files; narrows the global [10, 60]

  bool operator==(const ContextEntry&) const = default;
  std::string label() const; // "traveler/backpack/asphalt road"
};

std::vector<std::string> check_context(const ContextEntry& ctx);

// JSON array of context records. Throws InvariantError listing invalid entries.
std::vector<ContextEntry> parse_context_library(std::string_view text);
std::vector<ContextEntry> load_context_library(const std::filesystem::path& path);
std::string serialize_context_library(const std::vector<ContextEntry>& contexts);

// Path of the context library shipped with the project.
std::filesystem::path default_context_library();

inline constexpr const char* kAngledFrictionTemplate = "angled-friction-3-3";

struct GenSpec {
  std::string template_id = kAngledFrictionTemplate;
  std::string bank_id = "3-3";
  std::string topic = "Forces";
  std::vector<ContextEntry> contexts;
  int n_items = 20;
  std::uint64_t seed = 0;
  int rounding_decimals = 2;
};

// Spec file: {"template_id", "bank_id", "topic", "n_items", "seed", "rounding_decimals",
//             "contexts": [...] | "context_library": "<path relative to the spec file>"}
GenSpec load_gen_spec(const std::filesystem::path& path);

using Rng = std::mt19937_64;

// Independent stream for item `index` of a run seeded with `seed`.
std::uint64_t item_seed(std::uint64_t seed, std::uint64_t index);

inline constexpr int kMaxSampleAttempts = 1000;

// Rejection-samples rounded mu, mass and angle inside the context's ranges, derives the
// force from the rounded values, rounds it, and picks the unknown uniformly.
// Throws InfeasibleError after kMaxSampleAttempts rejected draws.
StructuralParams sample_structural(const ContextEntry& ctx, Rng& rng, int decimals);

// Composes the stem for the given (rounded) params; the key is solved from the displayed values.
// `phrasing` selects one of the stem layouts (taken modulo the layout count).
ProblemItem render_item(const ContextEntry& ctx, const StructuralParams& params, const std::string& template_id,
                        const std::string& item_id, int decimals, unsigned phrasing = 0);

// Re-reads the displayed quantities from the stem, re-solves, and compares against the key.
// Returns an empty string on success, otherwise a description of the mismatch.
std::string verify_item(const ProblemItem& item);

ProblemBank generate_bank(const GenSpec& spec);

// "{name}" placeholder substitution; throws TemplateError naming the first missing field.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& fields);

// A problem template: context schema, sampling, rendering and verification.
class ProblemTemplate {
public:
  virtual ~ProblemTemplate() = default;
  virtual std::string id() const = 0;
  virtual std::vector<std::string> check_context(const ContextEntry& ctx) const = 0;
  virtual StructuralParams sample(const ContextEntry& ctx, Rng& rng, int decimals) const = 0;
  virtual ProblemItem render(const ContextEntry& ctx, const StructuralParams& params, const std::string& item_id,
                             int decimals, unsigned phrasing) const = 0;
  virtual std::string verify(const ProblemItem& item) const = 0;
};

// Throws ConfigError for an unknown template id.
const ProblemTemplate& find_template(const std::string& template_id);

struct ContextRequestResult {
  std::vector<ContextEntry> accepted;
  std::vector<std::string> rejected; // one reason per rejected record
};

// Asks a chat endpoint for new context records and keeps those that pass check_context.
ContextRequestResult request_contexts(ChatClient& client, const ModelEndpoint& endpoint, int count,
                                      const std::vector<ContextEntry>& examples);

} // namespace isobank
