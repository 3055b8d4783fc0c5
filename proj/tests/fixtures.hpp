#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "isobank/eval.hpp"
#include "isobank/stats.hpp"

namespace fixtures {

using namespace isobank;

inline ProblemItem numeric_item(const std::string& id, double key, const std::string& unit = "kg") {
  ProblemItem it;
  it.item_id = id;
  it.stem = fmt::format("Item {}: find the quantity. Round your answers to two decimal places.", id);
  it.answer_key = NumericKey{key, unit, 2};
  return it;
}

inline ProblemItem choice_item(const std::string& id, const std::string& correct) {
  ProblemItem it;
  it.item_id = id;
  it.stem = fmt::format("Item {}: which statement is true?", id);
  it.answer_key = ChoiceKey{correct, {{"A", "alpha"}, {"B", "beta"}, {"C", "gamma"}, {"D", "delta"}}};
  return it;
}

// NUM bank with items q1..qn whose keys are 1.00, 2.00, ...
inline ProblemBank numeric_bank(const std::string& bank_id, int n_items) {
  ProblemBank b;
  b.bank_id = bank_id;
  b.topic = "Fixture";
  b.question_type = QuestionType::NUM;
  for (int i = 1; i <= n_items; ++i)
    b.items.push_back(numeric_item(fmt::format("q{}", i), static_cast<double>(i)));
  return b;
}

inline ProblemBank choice_bank(const std::string& bank_id, int n_items) {
  ProblemBank b;
  b.bank_id = bank_id;
  b.topic = "Fixture";
  b.question_type = QuestionType::MCQ;
  for (int i = 1; i <= n_items; ++i)
    b.items.push_back(choice_item(fmt::format("q{}", i), "B"));
  return b;
}

inline ResponseRecord record(const std::string& who, ResponderKind kind, const std::string& bank,
                             const std::string& item, bool correct, int attempt = 1) {
  ResponseRecord r;
  r.responder_id = who;
  r.responder_kind = kind;
  r.bank_id = bank;
  r.item_id = item;
  r.attempt = attempt;
  r.correct = correct;
  r.timestamp = "2025-01-01T00:00:00.000Z";
  return r;
}

// Student records where item q(i+1) receives totals[i] responses, correct[i] of them correct.
// Each student answers exactly one item of the bank.
inline std::vector<ResponseRecord> student_records(const std::string& bank, const std::vector<int>& correct,
                                                   const std::vector<int>& totals) {
  std::vector<ResponseRecord> out;
  int sid = 0;
  for (size_t i = 0; i < totals.size(); ++i)
    for (int k = 0; k < totals[i]; ++k)
      out.push_back(record(fmt::format("s{:03}", ++sid), ResponderKind::student, bank, fmt::format("q{}", i + 1),
                           k < correct[i]));
  return out;
}

// LM records for models m1..m<n_models>, one attempt each; item q(i+1) is solved by the first
// correct[i] models.
inline std::vector<ResponseRecord> lm_records(const std::string& bank, const std::vector<int>& correct,
                                              int n_models) {
  std::vector<ResponseRecord> out;
  for (size_t i = 0; i < correct.size(); ++i)
    for (int m = 0; m < n_models; ++m)
      out.push_back(record(fmt::format("m{}", m + 1), ResponderKind::lm, bank, fmt::format("q{}", i + 1),
                           m < correct[i]));
  return out;
}

inline std::vector<stats::ItemStats> items_from_counts(const std::vector<int>& correct, const std::vector<int>& totals) {
  std::vector<stats::ItemStats> out;
  for (size_t i = 0; i < totals.size(); ++i)
    out.push_back(stats::make_item_stats(fmt::format("q{}", i + 1), totals[i], correct[i]));
  return out;
}

inline std::string solver_json(const std::string& answer) {
  return fmt::format(R"({{"reasoning": "worked solution", "answer": "{}"}})", answer);
}

// Scripted chat client. `script` maps (endpoint, user message) to a reply; the client records
// the number of calls and the peak number of overlapping calls.
class ScriptedClient : public ChatClient {
public:
  using Script = std::function<ChatReply(const ModelEndpoint&, const std::string& user)>;

  explicit ScriptedClient(Script script, std::chrono::milliseconds delay = std::chrono::milliseconds(0))
      : script_(std::move(script)), delay_(delay) {}

  void preflight(const ModelEndpoint& ep) override {
    std::lock_guard lock(mutex_);
    preflighted.push_back(ep.model_name);
  }

  ChatReply complete(const ModelEndpoint& ep, const std::vector<ChatMessage>& messages) override {
    const int now = ++in_flight;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
    ++calls;
    if (delay_.count() > 0)
      std::this_thread::sleep_for(delay_);
    ChatReply r = script_(ep, messages.back().content);
    --in_flight;
    return r;
  }

  std::atomic<int> calls{0};
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
  std::vector<std::string> preflighted;

private:
  Script script_;
  std::chrono::milliseconds delay_;
  std::mutex mutex_;
};

inline ChatReply ok_reply(const std::string& content) {
  ChatReply r;
  r.ok = true;
  r.http_status = 200;
  r.content = content;
  return r;
}

// Item id embedded in fixture stems ("Item q7: ...").
inline std::string item_of(const std::string& user) {
  const auto b = user.find("Item ");
  const auto e = user.find(':', b);
  return user.substr(b + 5, e - b - 5);
}

class TempDir {
public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            fmt::format("isobank-test-{}-{}-{}", ::getpid(), counter++,
                        std::chrono::steady_clock::now().time_since_epoch().count());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

} // namespace fixtures
