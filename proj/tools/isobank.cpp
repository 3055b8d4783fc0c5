// isobank: generate -> eval -> ingest-students -> analyze -> report.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 partial completion.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "isobank/eval.hpp"
#include "isobank/generate.hpp"
#include "isobank/ingest.hpp"
#include "isobank/report.hpp"

namespace {

using namespace isobank;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitPartial = 3;

void print_lines(const std::vector<std::string>& lines, std::string_view prefix) {
  for (const auto& l : lines)
    std::cerr << prefix << l << "\n";
}

struct GenerateArgs {
  std::string spec, out, contexts;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_items;
};

int run_generate(const GenerateArgs& a) {
  GenSpec spec = load_gen_spec(a.spec);
  if (a.seed)
    spec.seed = *a.seed;
  if (a.n_items)
    spec.n_items = *a.n_items;
  if (!a.contexts.empty())
    spec.contexts = load_context_library(a.contexts);
  const ProblemBank bank = generate_bank(spec);
  save_bank(bank, a.out);
  std::cout << fmt::format("wrote bank {} ({} items) to {}\n", bank.bank_id, bank.items.size(), a.out);
  return kExitOk;
}

int run_validate(const std::vector<std::string>& files) {
  int rc = kExitOk;
  for (const auto& f : files) {
    std::vector<std::string> warnings;
    try {
      const ProblemBank bank = load_bank(f, &warnings);
      print_lines(warnings, fmt::format("{}: warning: ", f));
      std::cout << fmt::format("{}: ok (bank {}, {} {} items)\n", f, bank.bank_id, bank.items.size(),
                               to_string(bank.question_type));
    } catch (const InvariantError& e) {
      std::cout << fmt::format("{}: invalid\n", f);
      for (const auto& v : e.violations())
        std::cout << "  " << v << "\n";
      rc = kExitData;
    } catch (const ParseError& e) {
      std::cout << fmt::format("{}: {}\n", f, e.what());
      rc = kExitData;
    }
  }
  return rc;
}

struct EvalArgs {
  std::string bank, manifest, store;
  int concurrency = 4;
  int attempts = 1;
  int max_tries = 3;
  int timeout_s = 600;
};

int run_eval(const EvalArgs& a) {
  const ProblemBank bank = load_bank(a.bank);
  const auto endpoints = load_manifest(a.manifest);
  ResponseStore store(a.store);
  print_lines(store.load_warnings(), "store: ");
  EvalOptions opts;
  opts.concurrency_limit = a.concurrency;
  opts.attempts_per_model = a.attempts;
  opts.max_tries = a.max_tries;
  HttpChatClient client(a.timeout_s);
  const EvalSummary s = evaluate_bank(bank, endpoints, opts, client, store);
  std::cout << fmt::format("bank {}: {} new records, {} already stored, {} requests, {} transport failures, "
                           "{} unparseable answers\n",
                           bank.bank_id, s.new_records.size(), s.skipped_existing, s.requests_issued,
                           s.transport_failures, s.parse_failures);
  return s.transport_failures > 0 ? kExitPartial : kExitOk;
}

struct IngestArgs {
  std::string csv, banks, store;
  bool strict = false;
};

int run_ingest(const IngestArgs& a) {
  std::vector<std::string> warnings;
  const auto banks = load_bank_dir(a.banks, &warnings);
  print_lines(warnings, "banks: ");
  const IngestResult r = load_student_csv(a.csv, banks, a.strict);
  ResponseStore store(a.store);
  print_lines(store.load_warnings(), "store: ");
  std::size_t appended = 0;
  for (const auto& rec : r.records)
    appended += store.append(rec) ? 1 : 0;
  for (const auto& rej : r.rejections)
    std::cerr << fmt::format("{}:{}: skipped: {}\n", a.csv, rej.line, rej.reason);
  std::cout << fmt::format("{} rows read, {} records appended, {} already stored, {} rejected\n", r.input_rows,
                           appended, r.records.size() - appended, r.rejections.size());
  return r.rejections.empty() ? kExitOk : kExitPartial;
}

struct AnalyzeArgs {
  std::string store, banks, out;
  AnalyzeConfig config;
};

int run_analyze(const AnalyzeArgs& a) {
  const AnalyzeSummary s = cmd_analyze(a.store, a.banks, a.out, a.config);
  print_lines(s.warnings, "warning: ");
  print_lines(s.skipped, "skipped: ");
  for (const auto& p : s.written)
    std::cout << "wrote " << p.string() << "\n";
  return s.skipped.empty() ? kExitOk : kExitPartial;
}

struct ReportArgs {
  std::string results, format = "text-table", manifest, out, items_dir;
};

int run_report(const ReportArgs& a) {
  const ReportFormat format = report_format_from_string(a.format);
  std::optional<std::vector<ModelEndpoint>> manifest;
  if (!a.manifest.empty())
    manifest = load_manifest(a.manifest);
  const ReportOutput r = cmd_report(a.results, format, manifest ? &*manifest : nullptr);
  std::string text = r.bank_table;
  if (!r.group_tables.empty())
    text += "\n" + r.group_tables;
  if (a.out.empty())
    std::cout << text;
  else
    write_text_file(a.out, text);
  if (!a.items_dir.empty()) {
    std::filesystem::create_directories(a.items_dir);
    for (const auto& [name, content] : r.item_csvs)
      write_text_file(std::filesystem::path(a.items_dir) / name, content);
  }
  return kExitOk;
}

int run_compare(const std::string& results, const std::string& bank) {
  std::cout << render_comparison(load_results_dir(results), bank);
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isomorphic physics problem banks: generation, LM evaluation and difficulty statistics"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate a problem bank from a generation spec");
  generate->add_option("--spec", gen.spec, "Generation spec (JSON)")->required()->check(CLI::ExistingFile);
  generate->add_option("--seed", gen.seed, "Seed (overrides the spec)");
  generate->add_option("--out", gen.out, "Output bank file")->required();
  generate->add_option("--contexts", gen.contexts, "Context library (overrides the spec)")->check(CLI::ExistingFile);
  generate->add_option("--n-items", gen.n_items, "Number of items (overrides the spec)")->check(CLI::PositiveNumber);

  std::vector<std::string> validate_files;
  auto* validate = app.add_subcommand("validate-bank", "Check bank files against the bank invariants");
  validate->add_option("files", validate_files, "Bank files")->required()->check(CLI::ExistingFile);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Query every manifest model on every bank item");
  eval->add_option("--bank", ev.bank, "Bank file")->required()->check(CLI::ExistingFile);
  eval->add_option("--manifest", ev.manifest, "Model endpoint manifest")->required()->check(CLI::ExistingFile);
  eval->add_option("--store", ev.store, "Response store (JSONL, appended)")->required();
  eval->add_option("--concurrency", ev.concurrency, "Maximum in-flight requests")->check(CLI::PositiveNumber);
  eval->add_option("--attempts", ev.attempts, "Attempts per model per item")->check(CLI::PositiveNumber);
  eval->add_option("--max-tries", ev.max_tries, "Tries per request on transport/5xx errors")->check(CLI::PositiveNumber);
  eval->add_option("--timeout", ev.timeout_s, "Per-request timeout in seconds")->check(CLI::PositiveNumber);

  IngestArgs ing;
  auto* ingest = app.add_subcommand("ingest-students", "Import student response CSV into the store");
  ingest->add_option("--csv", ing.csv, "CSV with student_id,bank_id,item_id,correct")->required()->check(CLI::ExistingFile);
  ingest->add_option("--banks", ing.banks, "Bank directory")->required()->check(CLI::ExistingDirectory);
  ingest->add_option("--store", ing.store, "Response store (JSONL, appended)")->required();
  ingest->add_flag("--strict", ing.strict, "Abort on any rejected row");

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Compute item/bank statistics and write results files");
  analyze->add_option("--store", an.store, "Response store")->required()->check(CLI::ExistingFile);
  analyze->add_option("--banks", an.banks, "Bank directory")->required()->check(CLI::ExistingDirectory);
  analyze->add_option("--out", an.out, "Results directory")->required();
  analyze->add_option("--alpha", an.config.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  analyze->add_option("--min-n", an.config.min_n, "Minimum student responses per item for correlation");
  analyze->add_option("--exact-limit", an.config.fisher.exact_limit, "Largest table enumeration done exactly");
  analyze->add_option("--mc-replicates", an.config.fisher.mc_replicates, "Monte Carlo replicates")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--mc-seed", an.config.fisher.mc_seed, "Monte Carlo seed");
  analyze->add_flag("--strict", an.config.strict, "Abort on unresolvable records");

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Render bank, item and model-group tables from results");
  report->add_option("--results", rep.results, "Results directory")->required();
  report->add_option("--format", rep.format, "text-table, csv or markdown");
  report->add_option("--manifest", rep.manifest, "Manifest for model-group tables")->check(CLI::ExistingFile);
  report->add_option("--out", rep.out, "Write the report here instead of stdout");
  report->add_option("--items-dir", rep.items_dir, "Write per-item CSVs into this directory");

  std::string cmp_results, cmp_bank;
  auto* compare = app.add_subcommand("compare", "Show LM and student item statistics side by side");
  compare->add_option("--results", cmp_results, "Results directory")->required()->check(CLI::ExistingDirectory);
  compare->add_option("--bank", cmp_bank, "Bank id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*validate) return run_validate(validate_files);
    if (*eval) return run_eval(ev);
    if (*ingest) return run_ingest(ing);
    if (*analyze) return run_analyze(an);
    if (*report) return run_report(rep);
    if (*compare) return run_compare(cmp_results, cmp_bank);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvariantError& e) {
    std::cerr << "error: " << e.what() << "\n";
    print_lines(e.violations(), "  ");
    return kExitData;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}
