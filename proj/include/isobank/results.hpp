#pragma once

// Per-bank analysis results files, written by `analyze` and read by `report`/`compare`.
//
//   <dir>/<bank_id>.lm.json, <dir>/<bank_id>.student.json   item stats, bank stats, outliers
//   <dir>/<bank_id>.correlation.json                        LM vs student correlation
//   <dir>/models.json                                       per-model accuracy by question type

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "isobank/stats.hpp"

namespace isobank {

struct BankResults {
  std::string bank_id;
  ResponderKind responder_kind = ResponderKind::lm;
  QuestionType question_type = QuestionType::NUM;
  std::size_t n_bank_items = 0;
  std::size_t n_responders = 0;
  std::size_t n_records = 0;
  std::vector<stats::ItemStats> item_stats;
  std::optional<stats::BankStats> bank_stats; // absent when fewer than two items had responses
  std::string bank_stats_error;
  std::vector<stats::OutlierFlag> outliers;
};

struct CorrelationFile {
  std::string bank_id;
  std::optional<stats::CorrelationResult> result;
  std::string error; // set when the correlation could not be computed
};

struct ResultsSet {
  struct Bank {
    std::optional<BankResults> lm;
    std::optional<BankResults> student;
    std::optional<CorrelationFile> correlation;
  };
  std::map<std::string, Bank> banks;
  std::map<std::string, stats::ModelAccuracy> models;
};

std::string serialize_bank_results(const BankResults& r);
BankResults parse_bank_results(std::string_view text);
std::string serialize_correlation(const CorrelationFile& c);
CorrelationFile parse_correlation(std::string_view text);
std::string serialize_model_accuracies(const std::map<std::string, stats::ModelAccuracy>& models);
std::map<std::string, stats::ModelAccuracy> parse_model_accuracies(std::string_view text);

std::filesystem::path bank_results_path(const std::filesystem::path& dir, const std::string& bank_id,
                                        ResponderKind kind);
std::filesystem::path correlation_path(const std::filesystem::path& dir, const std::string& bank_id);
std::filesystem::path models_path(const std::filesystem::path& dir);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// Reads every results file in a directory. A missing or empty directory yields an empty set.
ResultsSet load_results_dir(const std::filesystem::path& dir);

} // namespace isobank
