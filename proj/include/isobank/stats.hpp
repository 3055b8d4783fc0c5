#pragma once

// Item and bank difficulty statistics.
//
// Accuracy of an item is the proportion of correct responses; its standard error of
// measurement is the binomial sqrt(acc (1 - acc) / n). Bank mean/std are taken over item
// accuracies (unweighted, population std). Homogeneity is the Freeman-Halton extension of
// Fisher's exact test on the items x {correct, incorrect} table.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isobank/bank.hpp"
#include "isobank/chat_client.hpp"
#include "isobank/store.hpp"

namespace isobank::stats {

// Raised when a correlation input has no spread (ceiling/floor effect).
class ZeroVarianceError : public InsufficientDataError {
public:
  using InsufficientDataError::InsufficientDataError;
};

struct OutcomeCounts {
  std::int64_t correct = 0;
  std::int64_t incorrect = 0;
  std::int64_t total() const { return correct + incorrect; }
};

enum class TestMethod { exact_enumeration, monte_carlo };
std::string_view to_string(TestMethod m);
TestMethod test_method_from_string(std::string_view s);

struct FisherConfig {
  double exact_limit = 1e7;          // max enumerated tables before switching to Monte Carlo
  std::int64_t mc_replicates = 100000;
  std::uint64_t mc_seed = 20240917;
};

struct HomogeneityResult {
  double p_value = 1.0;
  double alpha = 0.05;
  bool homogeneous = true; // p_value > alpha
  TestMethod method = TestMethod::exact_enumeration;
  std::int64_t mc_replicates = 0; // monte_carlo only
  std::uint64_t mc_seed = 0;      // monte_carlo only
  bool degenerate = false;        // a column total was zero; p fixed at 1
};

// Upper bound on the number of margin-preserving tables: product over all but the last row of
// (min(row total, column totals) + 1). Saturates at +inf.
double table_count_bound(std::span<const OutcomeCounts> table);

// Freeman-Halton R x 2 test. Exact enumeration when table_count_bound <= exact_limit,
// otherwise Monte Carlo with fixed margins. Requires R >= 2 and every row total > 0.
HomogeneityResult fisher_rx2(std::span<const OutcomeCounts> table, const FisherConfig& config = {},
                             double alpha = 0.05);

// Same test with the method forced (for cross-checking); exact ignores exact_limit.
HomogeneityResult fisher_rx2_exact(std::span<const OutcomeCounts> table, double alpha = 0.05);
HomogeneityResult fisher_rx2_monte_carlo(std::span<const OutcomeCounts> table, std::int64_t replicates,
                                         std::uint64_t seed, double alpha = 0.05);

struct ItemStats {
  std::string item_id;
  std::int64_t n = 0;
  std::int64_t n_correct = 0;
  std::optional<double> acc; // empty when n == 0
  std::optional<double> sem;

  bool defined() const { return n > 0; }
};

ItemStats make_item_stats(std::string item_id, std::int64_t n, std::int64_t n_correct);

// One entry per bank item, in bank order. Records for other banks are ignored.
std::vector<ItemStats> item_stats(std::span<const ResponseRecord> records, const ProblemBank& bank);

struct BankStats {
  std::string bank_id;
  std::vector<ItemStats> item_stats;
  std::size_t n_items_used = 0;
  double mean_acc = 0.0;
  double std_acc = 0.0;
  HomogeneityResult homogeneity;
};

// Throws InsufficientDataError when fewer than two items have responses.
BankStats bank_stats(const std::string& bank_id, const std::vector<ItemStats>& items, double alpha = 0.05,
                     const FisherConfig& config = {});

// Product-moment correlation. Throws InsufficientDataError for length mismatch or n < 3,
// ZeroVarianceError when either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationResult {
  double rho = 0.0;
  std::size_t n_items = 0;
  std::vector<std::pair<std::string, std::string>> excluded; // (item_id, reason)
};

CorrelationResult correlate_lm_student(const std::vector<ItemStats>& lm_items,
                                       const std::vector<ItemStats>& student_items, std::int64_t min_n = 3);

enum class OutlierDirection { low, high };
std::string_view to_string(OutlierDirection d);

struct OutlierFlag {
  std::string item_id;
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  OutlierDirection direction = OutlierDirection::low;
  double acc = 0.0;
  double mean_rest = 0.0; // unweighted mean accuracy of the other items
};

inline constexpr double kOutlierMinGap = 0.15;

// Holm step-down adjustment; output in input order.
std::vector<double> holm_adjust(std::span<const double> p);

// One-vs-rest exact 2x2 test per item (item vs pooled rest of bank), Holm-adjusted.
// Flags items with p_adjusted <= alpha and |acc - mean_rest| >= min_gap. Fewer than three
// populated items yields no flags.
std::vector<OutlierFlag> flag_outliers(const std::vector<ItemStats>& items, double alpha = 0.05,
                                       double min_gap = kOutlierMinGap);

// Per-model mean item accuracy, split by question type.
struct ModelAccuracy {
  std::optional<double> num;
  std::optional<double> mcq;
};

std::map<std::string, ModelAccuracy> model_accuracies(std::span<const ResponseRecord> records,
                                                      const std::map<std::string, ProblemBank>& banks);

enum class Grouping { scale_bucket, family, variant };
Grouping grouping_from_string(std::string_view s);

// "<4B", "4-8B", "14-32B", or "other" for scales outside those buckets.
std::string scale_bucket(double scale_b);

struct GroupRow {
  std::string group;
  std::size_t n_models = 0;
  std::optional<double> acc_num;
  std::optional<double> acc_mcq;
};

// Group accuracy is the unweighted mean of member models' accuracies. Empty groups are omitted.
std::vector<GroupRow> group_summary(const std::map<std::string, ModelAccuracy>& per_model,
                                    const std::vector<ModelEndpoint>& endpoints, Grouping grouping);

std::vector<GroupRow> group_summary(std::span<const ResponseRecord> records,
                                    const std::map<std::string, ProblemBank>& banks,
                                    const std::vector<ModelEndpoint>& endpoints, Grouping grouping);

} // namespace isobank::stats
