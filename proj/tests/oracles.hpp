#pragma once

// Independent reference implementations used to check the library. Deliberately naive.

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <numeric>
#include <vector>

namespace oracle {

inline std::uint64_t binom(int n, int k) {
  if (k < 0 || k > n)
    return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i)
    r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

// Freeman-Halton p-value for an R x 2 table {correct[i], total[i]} by enumerating every table with
// the same margins. The hypergeometric probability of a table is prod C(n_i, a_i) / C(N, c1),
// so comparing integer numerators decides "at most as probable" without rounding. Small N only.
inline double fisher_rx2_brute(const std::vector<int>& correct, const std::vector<int>& totals) {
  const int rows = static_cast<int>(totals.size());
  const int n = std::accumulate(totals.begin(), totals.end(), 0);
  const int c1 = std::accumulate(correct.begin(), correct.end(), 0);
  std::uint64_t obs = 1;
  for (int i = 0; i < rows; ++i)
    obs *= binom(totals[i], correct[i]);

  std::uint64_t tail = 0;
  std::vector<int> a(rows, 0);
  // Odometer over a_i in [0, n_i]; keep the ones whose column sum matches.
  while (true) {
    if (std::accumulate(a.begin(), a.end(), 0) == c1) {
      std::uint64_t num = 1;
      for (int i = 0; i < rows; ++i)
        num *= binom(totals[i], a[i]);
      if (num <= obs)
        tail += num;
    }
    int i = 0;
    while (i < rows && a[i] == totals[i])
      a[i++] = 0;
    if (i == rows)
      break;
    ++a[i];
  }
  return static_cast<double>(tail) / static_cast<double>(binom(n, c1));
}

// Two-sided Fisher 2x2 test for {a, n1 - a; b, n2 - b} by walking the support of the first cell.
// Long-double lgamma so it works where integer numerators would overflow.
inline double fisher_2x2_lgamma(int a, int n1, int b, int n2) {
  const int c1 = a + b, n = n1 + n2;
  auto lc = [](int nn, int k) {
    return std::lgamma(static_cast<long double>(nn) + 1) - std::lgamma(static_cast<long double>(k) + 1) -
           std::lgamma(static_cast<long double>(nn - k) + 1);
  };
  const long double denom = lc(n, c1);
  const long double obs = lc(n1, a) + lc(n2, b) - denom;
  long double p = 0;
  for (int x = std::max(0, c1 - n2); x <= std::min(n1, c1); ++x) {
    const long double lp = lc(n1, x) + lc(n2, c1 - x) - denom;
    if (lp <= obs + 1e-7L)
      p += std::exp(lp);
  }
  return static_cast<double>(std::min<long double>(p, 1.0L));
}

// Two-pass textbook Pearson correlation.
inline double pearson_direct(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Constant-velocity drag with the pull angled above the horizontal:
//   F cos(theta) = mu (m g - F sin(theta))
inline double pull_force(double mu, double m, double theta_deg, double g = 9.81) {
  const double t = theta_deg * 3.14159265358979323846 / 180.0;
  return mu * m * g / (std::cos(t) + mu * std::sin(t));
}

inline double pull_mass(double mu, double f, double theta_deg, double g = 9.81) {
  const double t = theta_deg * 3.14159265358979323846 / 180.0;
  return f * (std::cos(t) + mu * std::sin(t)) / (mu * g);
}

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

} // namespace oracle
