// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "fixtures.hpp"
#include "isobank/generate.hpp"
#include "isobank/ingest.hpp"
#include "isobank/physics.hpp"
#include "isobank/report.hpp"
#include "oracles.hpp"

using namespace isobank;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<stats::OutcomeCounts> table_of(const std::vector<int>& correct, const std::vector<int>& totals) {
  std::vector<stats::OutcomeCounts> t;
  for (size_t i = 0; i < totals.size(); ++i)
    t.push_back({correct[i], totals[i] - correct[i]});
  return t;
}

// ---------------------------------------------------------------------------
// 1. exact test vs brute-force enumeration on every R x 2 table with R <= 4, N <= 20

// For fixed row totals, every margin-preserving table grouped by its first-column total, with
// integer hypergeometric numerators sorted and prefix-summed so each observed table's p-value is a
// binary search.
struct RowTotalsOracle {
  std::vector<std::vector<std::uint64_t>> nums;   // by c1, sorted
  std::vector<std::vector<std::uint64_t>> prefix; // by c1
  std::vector<int> totals;

  explicit RowTotalsOracle(std::vector<int> t) : totals(std::move(t)) {
    const int n = std::accumulate(totals.begin(), totals.end(), 0);
    nums.assign(n + 1, {});
    prefix.assign(n + 1, {});
    for_each_table([&](const std::vector<int>& a, int c1, std::uint64_t num) {
      (void)a;
      nums[c1].push_back(num);
    });
    for (int c = 0; c <= n; ++c) {
      std::sort(nums[c].begin(), nums[c].end());
      std::uint64_t s = 0;
      prefix[c].push_back(0);
      for (auto v : nums[c])
        prefix[c].push_back(s += v);
    }
  }

  void for_each_table(const std::function<void(const std::vector<int>&, int, std::uint64_t)>& f) const {
    const size_t rows = totals.size();
    std::vector<int> a(rows, 0);
    while (true) {
      int c1 = 0;
      std::uint64_t num = 1;
      for (size_t i = 0; i < rows; ++i) {
        c1 += a[i];
        num *= oracle::binom(totals[i], a[i]);
      }
      f(a, c1, num);
      size_t i = 0;
      while (i < rows && a[i] == totals[i])
        a[i++] = 0;
      if (i == rows)
        break;
      ++a[i];
    }
  }

  double p_value(int c1, std::uint64_t obs) const {
    const auto& v = nums[c1];
    const size_t k = static_cast<size_t>(std::upper_bound(v.begin(), v.end(), obs) - v.begin());
    return static_cast<double>(prefix[c1][k]) / static_cast<double>(prefix[c1].back());
  }
};

Outcome criterion_exact_oracle() {
  const auto t0 = Clock::now();
  std::int64_t checked = 0, failures = 0;
  double worst = 0.0;
  std::vector<int> worst_table;
  // Row totals: ordered compositions with positive parts and sum <= 20.
  std::function<void(std::vector<int>&, int, int)> rec = [&](std::vector<int>& totals, int rows_left, int budget) {
    if (rows_left == 0) {
      const RowTotalsOracle o(totals);
      o.for_each_table([&](const std::vector<int>& a, int c1, std::uint64_t num) {
        const double expect = o.p_value(c1, num);
        const auto got = stats::fisher_rx2(table_of(a, totals)).p_value;
        const double d = std::abs(got - expect);
        ++checked;
        if (d > worst) {
          worst = d;
          worst_table = a;
        }
        if (!(d < 1e-12))
          ++failures;
      });
      return;
    }
    for (int n = 1; n <= budget - (rows_left - 1); ++n) {
      totals.push_back(n);
      rec(totals, rows_left - 1, budget - n);
      totals.pop_back();
    }
  };
  for (int rows = 2; rows <= 4; ++rows) {
    std::vector<int> totals;
    rec(totals, rows, 20);
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && secs < 60.0,
          fmt::format("{} tables, max |dp| = {:.2e}, {} over 1e-12, {:.1f} s", checked, worst, failures, secs)};
}

// ---------------------------------------------------------------------------
// 2. Monte Carlo vs exact on random tables

Outcome criterion_monte_carlo() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(99);
  constexpr std::int64_t kReplicates = 100000;
  int within = 0, tables = 0;
  while (tables < 50) {
    const int rows = 3 + static_cast<int>(rng() % 5);
    std::vector<int> totals, correct;
    for (int i = 0; i < rows; ++i) {
      totals.push_back(4 + static_cast<int>(rng() % 15));
      // Rows share a base rate with some spread so p-values cover (0, 1).
      std::binomial_distribution<int> b(totals.back(), 0.35 + 0.3 * static_cast<double>(rng() % 100) / 100.0);
      correct.push_back(b(rng));
    }
    const auto table = table_of(correct, totals);
    if (stats::table_count_bound(table) > stats::FisherConfig{}.exact_limit)
      continue;
    ++tables;
    const double p = stats::fisher_rx2_exact(table).p_value;
    const double p_mc = stats::fisher_rx2_monte_carlo(table, kReplicates, 20240917 + tables).p_value;
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(kReplicates));
    if (std::abs(p_mc - p) <= 3.0 * se)
      ++within;
  }
  const double secs = seconds_since(t0);
  return {within >= 48 && secs < 120.0, fmt::format("{}/50 within 3 SE (B = 1e5), {:.1f} s", within, secs)};
}

// ---------------------------------------------------------------------------
// 3. homogeneous / heterogeneous classification and outlier naming

Outcome criterion_classification() {
  // 12 items x 12 responses, accuracies 7/12..9/12 (about 0.65).
  const std::vector<int> homo_correct{8, 8, 7, 8, 9, 8, 7, 8, 8, 9, 8, 7};
  const auto homo = stats::bank_stats("homo", fixtures::items_from_counts(homo_correct, std::vector<int>(12, 12)));
  const auto homo_flags = stats::flag_outliers(homo.item_stats);

  // 12 items x 20 responses: q5 at 2/20 = 0.1, the rest at 16/20 = 0.8.
  std::vector<int> het_correct(12, 16);
  het_correct[4] = 2;
  const auto het_items = fixtures::items_from_counts(het_correct, std::vector<int>(12, 20));
  const auto het = stats::bank_stats("het", het_items);
  const auto flags = stats::flag_outliers(het_items);

  // Raw one-vs-rest p-values against an independent 2x2 computation.
  bool p_ok = true;
  for (const auto& f : flags) {
    const int i = std::stoi(f.item_id.substr(1)) - 1;
    const int rest = std::accumulate(het_correct.begin(), het_correct.end(), 0) - het_correct[i];
    const double ref = oracle::fisher_2x2_lgamma(het_correct[i], 20, rest, 220);
    p_ok = p_ok && std::abs(ref - f.p_raw) <= 1e-9 * std::max(1.0, ref) + 1e-300;
  }
  const double homo_2x2 = oracle::fisher_2x2_lgamma(9, 12, 87 - 9, 132);

  const bool pass = homo.homogeneity.homogeneous && homo_flags.empty() && !het.homogeneity.homogeneous &&
                    flags.size() == 1 && flags[0].item_id == "q5" && p_ok && homo_2x2 > 0.05;
  return {pass, fmt::format("homogeneous p = {:.3f} ({}), heterogeneous p = {:.2e} ({}), flagged [{}]",
                            homo.homogeneity.p_value, stats::to_string(homo.homogeneity.method),
                            het.homogeneity.p_value, stats::to_string(het.homogeneity.method),
                            flags.empty() ? std::string() : flags[0].item_id + (flags.size() > 1 ? ", ..." : ""))};
}

// ---------------------------------------------------------------------------
// 4. bank 2-2 row of the bank-level table

Outcome criterion_table_row() {
  const std::vector<int> lm_correct{13, 9, 11, 11, 13, 11, 11, 13, 13, 12, 10, 10, 13, 13, 13, 9, 10, 11, 11, 10};
  const std::vector<int> stu_correct{7, 6, 8, 5, 9, 9, 7, 9, 10, 9, 7, 8, 9, 11, 9, 4, 8, 7, 6, 4};
  const std::vector<int> stu_totals{8, 12, 9, 12, 14, 10, 13, 14, 18, 14, 14, 14, 11, 16, 16, 9, 11, 14, 8, 10};

  auto records = fixtures::lm_records("2-2", lm_correct, 17);
  const auto stu = fixtures::student_records("2-2", stu_correct, stu_totals);
  records.insert(records.end(), stu.begin(), stu.end());
  const std::map<std::string, ProblemBank> banks{{"2-2", fixtures::numeric_bank("2-2", 20)}};

  fixtures::TempDir dir;
  write_results(analyze_records(records, banks, {}), dir.path());
  const std::string table = cmd_report(dir.path(), ReportFormat::text_table).bank_table;

  std::vector<std::string> cells;
  std::istringstream lines(table);
  for (std::string line; std::getline(lines, line);)
    if (line.rfind("2-2 ", 0) == 0) {
      std::istringstream ws(line);
      for (std::string c; ws >> c;)
        cells.push_back(c);
    }
  const std::vector<std::string> expected{"2-2", "20", "0.668", "0.082", "\xE2\x9C\x93", "247",
                                          "0.628", "0.153", "\xE2\x9C\x93", "0.406"};
  std::string row;
  for (const auto& c : cells)
    row += (row.empty() ? "" : " ") + c;
  return {cells == expected, fmt::format("row: {}", row)};
}

// ---------------------------------------------------------------------------
// 5. generator soundness at n = 1000

Outcome criterion_generator() {
  const auto t0 = Clock::now();
  GenSpec spec;
  spec.contexts = load_context_library(default_context_library());
  spec.n_items = 1000;
  spec.seed = 20250101;
  const ProblemBank a = generate_bank(spec);
  const ProblemBank b = generate_bank(spec);
  const bool identical = serialize_bank(a) == serialize_bank(b);

  std::size_t violations = validate_bank(a).size(), verify_failures = 0, grade_failures = 0;
  for (const auto& item : a.items) {
    if (!item.structural || !check_structural(*item.structural).empty())
      ++violations;
    if (!verify_item(item).empty())
      ++verify_failures;
    const auto& key = std::get<NumericKey>(item.answer_key);
    if (!grade(item, fmt::format("{:.{}f} {}", key.value, key.decimals, key.unit)))
      ++grade_failures;
  }
  const double secs = seconds_since(t0);
  return {a.items.size() == 1000 && identical && violations == 0 && verify_failures == 0 && grade_failures == 0 &&
              secs < 10.0,
          fmt::format("{} items, {} violations, {} verification failures, {} regrade failures, byte-identical: {}, "
                      "{:.2f} s",
                      a.items.size(), violations, verify_failures, grade_failures, identical ? "yes" : "no", secs)};
}

// ---------------------------------------------------------------------------
// 6. physics oracle

Outcome criterion_physics() {
  const auto contexts = load_context_library(default_context_library());
  Rng rng(606);
  double worst = 0.0;
  int over = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto& ctx = contexts[static_cast<size_t>(i) % contexts.size()];
    const StructuralParams p = sample_structural(ctx, rng, 2);
    const double f = physics::required_force(p.mu, p.mass_kg, p.angle_deg, p.g, p.direction);
    const double t = p.angle_deg * 3.14159265358979323846 / 180.0;
    const double sign = p.direction == Direction::upward ? -1.0 : 1.0;
    const double r = std::abs(f * std::cos(t) - p.mu * (p.mass_kg * p.g + sign * f * std::sin(t)));
    worst = std::max(worst, r);
    over += r < 1e-9 ? 0 : 1;
  }

  ContextEntry traveler{"traveler", "backpack", "asphalt road", Verb::pull, Direction::upward, {5, 25}, {0.4, 0.9}};
  StructuralParams v1;
  v1.mu = 0.73;
  v1.angle_deg = 37.92;
  v1.force_N = 59.81;
  v1.unknown = Unknown::mass;
  const ProblemItem item1 = render_item(traveler, v1, kAngledFrictionTemplate, "v1", 2);
  const double key1 = oracle::round2(oracle::pull_mass(0.73, 59.81, 37.92));

  ContextEntry dog{"dog", "sled", "icy path", Verb::pull, Direction::upward, {5, 20}, {0.05, 0.6}};
  StructuralParams v2;
  v2.mu = 0.59;
  v2.mass_kg = 10.21;
  v2.angle_deg = 31.21;
  v2.unknown = Unknown::force;
  const ProblemItem item2 = render_item(dog, v2, kAngledFrictionTemplate, "v2", 2);
  const double key2 = oracle::round2(oracle::pull_force(0.59, 10.21, 31.21));

  const bool v_ok = grade(item1, fmt::format("{:.2f}", key1)) && grade(item2, fmt::format("{:.2f}", key2)) &&
                    std::get<NumericKey>(item1.answer_key).value == key1 &&
                    std::get<NumericKey>(item2.answer_key).value == key2;
  return {over == 0 && v_ok, fmt::format("max residual {:.2e} over 1e4 draws; traveler mass key {:.2f} kg, "
                                         "dog force key {:.2f} N, regrade {}",
                                         worst, key1, key2, v_ok ? "correct" : "WRONG")};
}

// ---------------------------------------------------------------------------
// 7. end-to-end run against a scripted chat endpoint

class MockEndpoint {
public:
  // planted[model][item] = whether that model answers the item correctly
  MockEndpoint(const ProblemBank& bank, std::map<std::string, std::vector<bool>> planted)
      : planted_(std::move(planted)) {
    for (size_t i = 0; i < bank.items.size(); ++i)
      by_stem_[bank.items[i].stem] = {i, std::get<NumericKey>(bank.items[i].answer_key).value};

    server_.Get("/v1/models", [this](const httplib::Request& req, httplib::Response& res) {
      ++model_listings;
      if (!authorized(req)) {
        res.status = 401;
        return;
      }
      res.set_content(R"({"object": "list", "data": []})", "application/json");
    });
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++chat_requests;
      if (!authorized(req)) {
        res.status = 401;
        return;
      }
      const auto body = nlohmann::json::parse(req.body);
      const std::string model = body.at("model").get<std::string>();
      const std::string user = body.at("messages").back().at("content").get<std::string>();
      const auto it = by_stem_.find(user);
      const auto pl = planted_.find(model);
      if (it == by_stem_.end() || pl == planted_.end()) {
        res.status = 400;
        return;
      }
      const auto [index, key] = it->second;
      const double answer = pl->second[index] ? key : key * 1.5 + 1.0;
      std::string content = fmt::format(R"({{"reasoning": "balance the forces", "answer": "{:.2f}"}})", answer);
      if (model == "fenced-model")
        content = "```json\n" + content + "\n```\nDone.";
      nlohmann::json reply = {{"id", "x"},
                              {"object", "chat.completion"},
                              {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockEndpoint() {
    server_.stop();
    thread_.join();
  }

  int port() const { return port_; }

  std::atomic<int> chat_requests{0};
  std::atomic<int> model_listings{0};

private:
  static bool authorized(const httplib::Request& req) {
    return req.get_header_value("Authorization") == "Bearer test-token";
  }

  std::map<std::string, std::vector<bool>> planted_;
  std::map<std::string, std::pair<size_t, double>> by_stem_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

Outcome criterion_end_to_end() {
  const auto t0 = Clock::now();
  fixtures::TempDir dir;
  std::filesystem::create_directories(dir / "banks");

  GenSpec spec;
  spec.contexts = load_context_library(default_context_library());
  spec.n_items = 20;
  spec.seed = 77;
  spec.bank_id = "3-3";
  const ProblemBank bank = generate_bank(spec);
  save_bank(bank, dir.path() / "banks" / "3-3.json");

  // Item i (0-based) is solved by the first correct_count[i] of the four models.
  const std::vector<std::string> models{"small-model", "mid-model", "fenced-model", "large-model"};
  std::vector<int> correct_count(20);
  for (int i = 0; i < 20; ++i)
    correct_count[i] = (i * 7 + 3) % 5; // 0..4
  std::map<std::string, std::vector<bool>> planted;
  for (size_t m = 0; m < models.size(); ++m)
    for (int i = 0; i < 20; ++i)
      planted[models[m]].push_back(static_cast<int>(m) < correct_count[i]);

  MockEndpoint server(bank, planted);
  ::setenv("ISOBANK_ACCEPTANCE_TOKEN", "test-token", 1);
  std::vector<ModelEndpoint> endpoints;
  for (size_t m = 0; m < models.size(); ++m) {
    ModelEndpoint ep;
    ep.model_name = models[m];
    ep.base_url = fmt::format("http://127.0.0.1:{}/v1", server.port());
    ep.api_key_env = "ISOBANK_ACCEPTANCE_TOKEN";
    ep.sampling = {{"temperature", 0.0}};
    ep.scale_b = m == 0 ? 1.7 : (m == 3 ? 32.0 : 8.0);
    endpoints.push_back(ep);
  }

  // Students: item i answered by 10 students, 2 * correct_count[i] + 1 of them correct.
  std::string csv = "student_id,bank_id,item_id,correct\n";
  int sid = 0;
  for (int i = 0; i < 20; ++i)
    for (int k = 0; k < 10; ++k)
      csv += fmt::format("s{},3-3,q{},{}\n", ++sid, i + 1, k < 2 * correct_count[i] + 1 ? 1 : 0);
  write_text_file(dir / "students.csv", csv);

  const auto store_path = dir / "responses.jsonl";
  EvalOptions opts;
  opts.concurrency_limit = 4;
  HttpChatClient client(30);
  EvalSummary first;
  {
    ResponseStore store(store_path);
    first = evaluate_bank(bank, endpoints, opts, client, store);
    const auto banks = load_bank_dir(dir / "banks");
    for (const auto& rec : load_student_csv(dir / "students.csv", banks).records)
      store.append(rec);
  }
  const int requests_after_first = server.chat_requests;
  cmd_analyze(store_path, dir / "banks", dir / "results", {});
  const ReportOutput report = cmd_report(dir / "results", ReportFormat::text_table, &endpoints);
  const std::string lm_results = read_text_file(dir / "results" / "3-3.lm.json");

  // Planted accuracies, read back from the results files.
  const ResultsSet results = load_results_dir(dir / "results");
  bool acc_ok = results.banks.count("3-3") && results.banks.at("3-3").lm && results.banks.at("3-3").student;
  if (acc_ok) {
    const auto& lm = results.banks.at("3-3").lm->item_stats;
    const auto& st = results.banks.at("3-3").student->item_stats;
    for (int i = 0; i < 20; ++i) {
      acc_ok = acc_ok && lm[i].n == 4 && lm[i].n_correct == correct_count[i] &&
               *lm[i].acc == static_cast<double>(correct_count[i]) / 4.0;
      acc_ok = acc_ok && st[i].n == 10 && st[i].n_correct == 2 * correct_count[i] + 1;
    }
    acc_ok = acc_ok && results.banks.at("3-3").correlation && results.banks.at("3-3").correlation->result &&
             std::abs(results.banks.at("3-3").correlation->result->rho - 1.0) < 1e-12;
  }

  // Rerun everything: no new requests, nothing changes on disk.
  const std::string store_before = read_text_file(store_path);
  EvalSummary second;
  {
    ResponseStore store(store_path);
    second = evaluate_bank(bank, endpoints, opts, client, store);
  }
  cmd_analyze(store_path, dir / "banks", dir / "results", {});
  const bool idempotent = second.requests_issued == 0 && second.new_records.empty() &&
                          server.chat_requests == requests_after_first && read_text_file(store_path) == store_before &&
                          read_text_file(dir / "results" / "3-3.lm.json") == lm_results &&
                          cmd_report(dir / "results", ReportFormat::text_table, &endpoints).bank_table ==
                              report.bank_table;

  const double secs = seconds_since(t0);
  const bool pass = first.new_records.size() == 80 && first.transport_failures == 0 && first.parse_failures == 0 &&
                    acc_ok && idempotent && report.bank_table.find("3-3") != std::string::npos && secs < 30.0;
  return {pass, fmt::format("{} chat requests, planted accuracies {}, rerun issued {} requests, {:.2f} s",
                            requests_after_first, acc_ok ? "reproduced" : "NOT reproduced", second.requests_issued,
                            secs)};
}

// ---------------------------------------------------------------------------
// 8. pearson vs the direct formula, and affine invariance

Outcome criterion_pearson() {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u(0.0, 1.0), scale(0.1, 10.0), shift(-5.0, 5.0);
  double worst_direct = 0.0, worst_affine = 0.0;
  for (int t = 0; t < 100; ++t) {
    const size_t n = 3 + rng() % 60;
    std::vector<double> x(n), y(n);
    const double coupling = 2.0 * u(rng) - 1.0;
    for (size_t i = 0; i < n; ++i) {
      x[i] = u(rng);
      y[i] = coupling * x[i] + 0.5 * u(rng);
    }
    const double r = stats::pearson(x, y);
    worst_direct = std::max(worst_direct, std::abs(r - oracle::pearson_direct(x, y)));

    const double a = scale(rng) * (rng() % 2 ? 1 : -1), b = shift(rng), c = scale(rng), d = shift(rng);
    std::vector<double> xa(n), yc(n);
    for (size_t i = 0; i < n; ++i) {
      xa[i] = a * x[i] + b;
      yc[i] = c * y[i] + d;
    }
    const double expected = a > 0 ? r : -r;
    worst_affine = std::max(worst_affine, std::abs(stats::pearson(xa, yc) - expected));
  }
  return {worst_direct < 1e-12 && worst_affine < 1e-12,
          fmt::format("max |diff| vs direct {:.2e}, under affine maps {:.2e}", worst_direct, worst_affine)};
}

// ---------------------------------------------------------------------------
// 9. scale-group aggregation

Outcome criterion_group_summary() {
  // NUM bank of 500 items and MCQ bank of 1000 items; per-model correct counts set the accuracies.
  const std::map<std::string, ProblemBank> banks{{"num", fixtures::numeric_bank("num", 500)},
                                                 {"mcq", fixtures::choice_bank("mcq", 1000)}};
  struct Model {
    std::string name;
    double scale;
    int num_correct;
    int mcq_correct;
  };
  const std::vector<Model> models{
      {"qwen3-0.6b", 0.6, 78, 259},  {"qwen3-1.7b", 1.7, 78, 259}, {"llama3-3b", 3.0, 78, 259},
      {"phi4-mini", 3.8, 78, 259},   {"qwen3-4b", 4.0, 260, 530},  {"qwen3-8b", 8.0, 270, 540},
      {"llama3-8b", 8.0, 265, 536},  {"qwen3-14b", 14.0, 420, 720}, {"qwen3-32b", 32.0, 420, 720}};

  std::vector<ResponseRecord> recs;
  std::vector<ModelEndpoint> eps;
  for (const auto& m : models) {
    for (int i = 0; i < 500; ++i)
      recs.push_back(fixtures::record(m.name, ResponderKind::lm, "num", fmt::format("q{}", i + 1), i < m.num_correct));
    for (int i = 0; i < 1000; ++i)
      recs.push_back(fixtures::record(m.name, ResponderKind::lm, "mcq", fmt::format("q{}", i + 1), i < m.mcq_correct));
    ModelEndpoint ep;
    ep.model_name = m.name;
    ep.scale_b = m.scale;
    eps.push_back(ep);
  }
  const auto rows = stats::group_summary(recs, banks, eps, stats::Grouping::scale_bucket);
  const std::string table = render_group_table(rows, "Scale", ReportFormat::text_table);

  std::string small_row;
  std::istringstream lines(table);
  for (std::string line; std::getline(lines, line);)
    if (line.rfind("<4B", 0) == 0)
      small_row = line;
  std::vector<std::string> cells;
  std::istringstream ws(small_row);
  for (std::string c; ws >> c;)
    cells.push_back(c);
  const bool pass = cells == std::vector<std::string>{"<4B", "4", "0.156", "0.259"};
  return {pass, fmt::format("row: {}", small_row)};
}

} // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"exact-test oracle equivalence", criterion_exact_oracle},
      {"Monte Carlo consistency", criterion_monte_carlo},
      {"classification boundary", criterion_classification},
      {"bank table row reproduction", criterion_table_row},
      {"generator soundness", criterion_generator},
      {"physics oracle", criterion_physics},
      {"end-to-end mock run", criterion_end_to_end},
      {"Pearson oracle", criterion_pearson},
      {"group summary", criterion_group_summary},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    failed += o.pass ? 0 : 1;
    std::cout << fmt::format("[{}] {}. {}: {}", o.pass ? "PASS" : "FAIL", index, c.name, o.detail) << std::endl;
  }
  std::cout << fmt::format("{}/{} criteria passed", std::size(criteria) - failed, std::size(criteria)) << std::endl;
  return failed == 0 ? 0 : 1;
}
