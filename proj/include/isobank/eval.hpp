#pragma once

// Zero-shot LM evaluation: prompt construction, JSON answer extraction, grading,
// and resumable dispatch against chat endpoints.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isobank/bank.hpp"
#include "isobank/chat_client.hpp"
#include "isobank/store.hpp"

namespace isobank {

// The fixed solver instructions sent as the system message.
extern const char* const kSolverSystemPrompt;

struct SolverPrompt {
  std::string system;
  std::string user;

  std::vector<ChatMessage> messages() const { return {{"system", system}, {"user", user}}; }
};

// NUM and MCQ only; throws UnsupportedTypeError for MA/CAT.
SolverPrompt build_prompt(const ProblemItem& item);

enum class ParseStatus { ok, repaired, failed };
std::string_view to_string(ParseStatus s);

struct SolverResponse {
  std::string raw_text;
  std::string reasoning;
  std::string answer;
  ParseStatus parse_status = ParseStatus::failed;
};

// Extraction ladder: whole text as JSON -> last balanced {...} block -> "answer" field pattern.
SolverResponse parse_answer(std::string_view raw_text);

// Throws UnsupportedTypeError for MA/CAT items.
bool grade(const ProblemItem& item, std::string_view answer_text);

// Absolute tolerance used for a numeric key.
double numeric_tolerance(const NumericKey& key);

// First real number in the text after removing thousands separators; nullopt if none.
std::optional<double> extract_number(std::string_view text);

struct EvalOptions {
  int attempts_per_model = 1;
  int concurrency_limit = 4;
  int max_tries = 3; // per request, transport/5xx only
  std::chrono::milliseconds initial_backoff{1000};
};

struct EvalSummary {
  std::vector<ResponseRecord> new_records;
  int requests_issued = 0; // chat calls including retries
  int transport_failures = 0;
  int parse_failures = 0;
  int skipped_existing = 0;
};

// Queries every (endpoint, item, attempt) not yet in the store and appends graded records.
// Configuration problems throw ConfigError before any request is sent.
EvalSummary evaluate_bank(const ProblemBank& bank, const std::vector<ModelEndpoint>& endpoints,
                          const EvalOptions& options, ChatClient& client, ResponseStore& store);

} // namespace isobank
