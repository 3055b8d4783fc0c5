#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "isobank/stats.hpp"

namespace isobank::stats {

std::string_view to_string(TestMethod m) {
  return m == TestMethod::exact_enumeration ? "exact_enumeration" : "monte_carlo";
}

TestMethod test_method_from_string(std::string_view s) {
  if (s == "exact_enumeration") return TestMethod::exact_enumeration;
  if (s == "monte_carlo") return TestMethod::monte_carlo;
  throw ParseError(fmt::format("unknown test method '{}'", s));
}

namespace {

// log(k!) for k = 0..n by cumulative summation.
std::vector<double> log_factorials(std::int64_t n) {
  std::vector<double> lf(static_cast<size_t>(n) + 1, 0.0);
  for (std::int64_t k = 2; k <= n; ++k)
    lf[static_cast<size_t>(k)] = lf[static_cast<size_t>(k - 1)] + std::log(static_cast<double>(k));
  return lf;
}

// Relative tie guard: Prob(T) <= Prob(obs) * (1 + 1e-12).
const double kLogTieGuard = std::log1p(1e-12);

struct Margins {
  std::vector<std::int64_t> rows;
  std::int64_t successes = 0;
  std::int64_t total = 0;
};

Margins check_table(std::span<const OutcomeCounts> table) {
  if (table.size() < 2)
    throw InsufficientDataError(fmt::format("exact test needs at least 2 rows (got {})", table.size()));
  Margins m;
  for (size_t i = 0; i < table.size(); ++i) {
    const auto& r = table[i];
    if (r.correct < 0 || r.incorrect < 0)
      throw DomainError(fmt::format("row {}: negative count", i));
    if (r.total() == 0)
      throw InsufficientDataError(fmt::format("row {}: row total is zero", i));
    m.rows.push_back(r.total());
    m.successes += r.correct;
    m.total += r.total();
  }
  return m;
}

HomogeneityResult finish(HomogeneityResult r, double alpha) {
  r.p_value = std::clamp(r.p_value, std::numeric_limits<double>::min(), 1.0);
  r.alpha = alpha;
  r.homogeneous = r.p_value > alpha;
  return r;
}

// Sum of log C(n_i, x_i) up to the constant log C(N, c1).
class TableWeights {
public:
  explicit TableWeights(const Margins& m) : lf_(log_factorials(m.total)), m_(m) {}

  double log_choose(std::int64_t n, std::int64_t k) const {
    return lf_[static_cast<size_t>(n)] - lf_[static_cast<size_t>(k)] - lf_[static_cast<size_t>(n - k)];
  }

  double log_denominator() const { return log_choose(m_.total, m_.successes); }

private:
  std::vector<double> lf_;
  const Margins& m_;
};

} // namespace

double table_count_bound(std::span<const OutcomeCounts> table) {
  std::int64_t c1 = 0, c2 = 0;
  for (const auto& r : table) {
    c1 += r.correct;
    c2 += r.incorrect;
  }
  double bound = 1.0;
  for (size_t i = 0; i + 1 < table.size(); ++i) {
    bound *= static_cast<double>(std::min({table[i].total(), c1, c2}) + 1);
    if (!std::isfinite(bound))
      return std::numeric_limits<double>::infinity();
  }
  return bound;
}

HomogeneityResult fisher_rx2_exact(std::span<const OutcomeCounts> table, double alpha) {
  const Margins m = check_table(table);
  HomogeneityResult res;
  res.method = TestMethod::exact_enumeration;
  if (m.successes == 0 || m.successes == m.total) {
    res.degenerate = true;
    res.p_value = 1.0;
    return finish(res, alpha);
  }

  const TableWeights w(m);
  double log_obs = 0.0;
  for (const auto& r : table)
    log_obs += w.log_choose(r.total(), r.correct);
  const double threshold = log_obs + kLogTieGuard;
  const double log_denom = w.log_denominator();

  const size_t R = m.rows.size();
  // capacity_after[i]: total of rows strictly after i
  std::vector<std::int64_t> capacity_after(R, 0);
  for (size_t i = R - 1; i-- > 0;)
    capacity_after[i] = capacity_after[i + 1] + m.rows[i + 1];

  double p = 0.0;
  // Depth-first over rows 0..R-2; the last row takes whatever successes remain.
  auto recurse = [&](auto&& self, size_t row, std::int64_t remaining, double partial) -> void {
    const std::int64_t n = m.rows[row];
    if (row == R - 1) {
      const double lp = partial + w.log_choose(n, remaining);
      if (lp <= threshold)
        p += std::exp(lp - log_denom);
      return;
    }
    const std::int64_t lo = std::max<std::int64_t>(0, remaining - capacity_after[row]);
    const std::int64_t hi = std::min(n, remaining);
    for (std::int64_t x = lo; x <= hi; ++x)
      self(self, row + 1, remaining - x, partial + w.log_choose(n, x));
  };
  recurse(recurse, 0, m.successes, 0.0);

  res.p_value = p;
  return finish(res, alpha);
}

HomogeneityResult fisher_rx2_monte_carlo(std::span<const OutcomeCounts> table, std::int64_t replicates,
                                         std::uint64_t seed, double alpha) {
  if (replicates < 1)
    throw DomainError("Monte Carlo test needs at least one replicate");
  const Margins m = check_table(table);
  HomogeneityResult res;
  res.method = TestMethod::monte_carlo;
  res.mc_replicates = replicates;
  res.mc_seed = seed;
  if (m.successes == 0 || m.successes == m.total) {
    res.degenerate = true;
    res.p_value = 1.0;
    return finish(res, alpha);
  }

  const TableWeights w(m);
  double log_obs = 0.0;
  for (const auto& r : table)
    log_obs += w.log_choose(r.total(), r.correct);
  const double threshold = log_obs + kLogTieGuard;

  // Outcomes 1 (correct) / 0 (incorrect); a permutation deals them out to rows in order.
  std::vector<std::uint8_t> outcomes(static_cast<size_t>(m.total), 0);
  std::fill_n(outcomes.begin(), m.successes, 1);
  std::mt19937_64 rng(seed);

  std::int64_t at_most_as_probable = 0;
  for (std::int64_t b = 0; b < replicates; ++b) {
    std::shuffle(outcomes.begin(), outcomes.end(), rng);
    double lp = 0.0;
    auto it = outcomes.begin();
    for (const std::int64_t n : m.rows) {
      const auto x = std::count(it, it + n, std::uint8_t{1});
      lp += w.log_choose(n, x);
      it += n;
    }
    if (lp <= threshold)
      ++at_most_as_probable;
  }
  res.p_value = static_cast<double>(1 + at_most_as_probable) / static_cast<double>(1 + replicates);
  return finish(res, alpha);
}

HomogeneityResult fisher_rx2(std::span<const OutcomeCounts> table, const FisherConfig& config, double alpha) {
  check_table(table);
  if (table_count_bound(table) <= config.exact_limit)
    return fisher_rx2_exact(table, alpha);
  return fisher_rx2_monte_carlo(table, config.mc_replicates, config.mc_seed, alpha);
}

} // namespace isobank::stats
