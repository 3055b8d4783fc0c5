#include <atomic>
#include <thread>

#include <fmt/format.h>

#include "isobank/eval.hpp"

namespace isobank {

namespace {

struct Job {
  const ModelEndpoint* endpoint;
  const ProblemItem* item;
  int attempt;
};

} // namespace

EvalSummary evaluate_bank(const ProblemBank& bank, const std::vector<ModelEndpoint>& endpoints,
                          const EvalOptions& options, ChatClient& client, ResponseStore& store) {
  if (bank.question_type != QuestionType::NUM && bank.question_type != QuestionType::MCQ)
    throw UnsupportedTypeError(
        fmt::format("bank '{}': only NUM and MCQ banks can be evaluated (got {})", bank.bank_id,
                    to_string(bank.question_type)));
  if (endpoints.empty())
    throw ConfigError("no endpoints to evaluate");
  if (options.attempts_per_model < 1)
    throw ConfigError("attempts_per_model must be >= 1");
  if (options.concurrency_limit < 1)
    throw ConfigError("concurrency_limit must be >= 1");
  if (options.max_tries < 1)
    throw ConfigError("max_tries must be >= 1");

  EvalSummary summary;
  std::vector<Job> jobs;
  std::vector<const ModelEndpoint*> active;
  for (const auto& ep : endpoints) {
    bool any = false;
    for (const auto& item : bank.items) {
      for (int a = 1; a <= options.attempts_per_model; ++a) {
        if (store.contains({ep.model_name, bank.bank_id, item.item_id, a})) {
          ++summary.skipped_existing;
          continue;
        }
        jobs.push_back({&ep, &item, a});
        any = true;
      }
    }
    if (any)
      active.push_back(&ep);
  }

  for (const auto* ep : active)
    client.preflight(*ep);
  if (jobs.empty())
    return summary;

  std::atomic<size_t> next{0};
  std::atomic<int> requests{0}, transport_failures{0}, parse_failures{0};
  std::mutex out_mutex;

  auto run_job = [&](const Job& job) {
    const SolverPrompt prompt = build_prompt(*job.item);
    const auto start = std::chrono::steady_clock::now();
    ChatReply reply;
    auto backoff = options.initial_backoff;
    for (int t = 0; t < options.max_tries; ++t) {
      ++requests;
      reply = client.complete(*job.endpoint, prompt.messages());
      if (reply.ok || !reply.retryable)
        break;
      if (t + 1 < options.max_tries) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
    }
    const auto latency =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();

    ResponseRecord rec;
    rec.responder_id = job.endpoint->model_name;
    rec.responder_kind = ResponderKind::lm;
    rec.bank_id = bank.bank_id;
    rec.item_id = job.item->item_id;
    rec.attempt = job.attempt;
    rec.timestamp = utc_timestamp_now();
    rec.latency_ms = latency;
    if (!reply.ok) {
      ++transport_failures;
      rec.correct = false;
      rec.parse_status = std::string(to_string(ParseStatus::failed));
      rec.transport_error = reply.error;
    } else {
      const SolverResponse parsed = parse_answer(reply.content);
      rec.answer_text = parsed.answer;
      rec.parse_status = std::string(to_string(parsed.parse_status));
      if (parsed.parse_status == ParseStatus::failed) {
        ++parse_failures;
        rec.correct = false;
      } else {
        rec.correct = grade(*job.item, parsed.answer);
      }
    }
    if (store.append(rec)) {
      std::lock_guard lock(out_mutex);
      summary.new_records.push_back(std::move(rec));
    }
  };

  const size_t n_workers = std::min(jobs.size(), static_cast<size_t>(options.concurrency_limit));
  std::vector<std::thread> workers;
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (size_t w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (size_t i; (i = next.fetch_add(1)) < jobs.size();) {
        try {
          run_job(jobs[i]);
        } catch (...) {
          std::lock_guard lock(err_mutex);
          if (!first_error)
            first_error = std::current_exception();
          next = jobs.size();
        }
      }
    });
  }
  for (auto& t : workers)
    t.join();
  if (first_error)
    std::rethrow_exception(first_error);

  summary.requests_issued = requests;
  summary.transport_failures = transport_failures;
  summary.parse_failures = parse_failures;
  return summary;
}

} // namespace isobank
