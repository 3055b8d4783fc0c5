#pragma once

// Analysis and report rendering behind the `analyze`, `report` and `compare` commands.

#include <filesystem>
#include <string>
#include <vector>

#include "isobank/results.hpp"

namespace isobank {

struct AnalyzeConfig {
  double alpha = 0.05;
  stats::FisherConfig fisher;
  std::int64_t min_n = 3;
  bool strict = false;
};

struct AnalyzeSummary {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> skipped; // unresolvable records, one line each
  std::vector<std::string> warnings;
};

// Writes one results file per bank per responder kind, a correlation file for banks that have
// both kinds, and models.json. Throws InsufficientDataError for an empty store; unresolvable
// records are skipped (or, with strict, raise InvariantError).
AnalyzeSummary cmd_analyze(const std::filesystem::path& store, const std::filesystem::path& banks_dir,
                           const std::filesystem::path& out_dir, const AnalyzeConfig& config);

// Pure analysis step over in-memory inputs, used by cmd_analyze.
ResultsSet analyze_records(const std::vector<ResponseRecord>& records,
                           const std::map<std::string, ProblemBank>& banks, const AnalyzeConfig& config,
                           std::vector<std::string>* skipped = nullptr);

void write_results(const ResultsSet& results, const std::filesystem::path& out_dir,
                   std::vector<std::filesystem::path>* written = nullptr);

enum class ReportFormat { text_table, csv, markdown };
ReportFormat report_format_from_string(std::string_view s);

// Bank-level table: Bank, #Items, LM acc/std/homo, #stu, student acc/std/homo, rho.
std::string render_bank_table(const ResultsSet& results, ReportFormat format);

// Per-item "item_id,acc,sem" CSV for plotting.
std::string render_item_csv(const BankResults& results);

std::string render_group_table(const std::vector<stats::GroupRow>& rows, std::string_view title, ReportFormat format);

// LM and student item statistics side by side for one bank, with outlier flags.
std::string render_comparison(const ResultsSet& results, const std::string& bank_id);

struct ReportOutput {
  std::string bank_table;
  std::vector<std::pair<std::string, std::string>> item_csvs; // (file name, content)
  std::string group_tables;                                   // empty without a manifest
};

ReportOutput cmd_report(const std::filesystem::path& results_dir, ReportFormat format,
                        const std::vector<ModelEndpoint>* manifest = nullptr);

} // namespace isobank
