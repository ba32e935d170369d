#pragma once

// Exact binomial (Clopper-Pearson style) upper confidence bounds plus the
// small descriptive statistics the experiment reports need.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace stodyn {

// P[Bin(n, p) <= k] computed through log-space terms.
inline double binomial_lower_tail(long k, long n, double p) {
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return k >= n ? 1.0 : 0.0;
  double log_p = std::log(p);
  double log_q = std::log1p(-p);
  double sum = 0.0;
  for (long j = 0; j <= k; ++j) {
    double log_c = std::lgamma(static_cast<double>(n) + 1.0) -
                   std::lgamma(static_cast<double>(j) + 1.0) -
                   std::lgamma(static_cast<double>(n - j) + 1.0);
    sum += std::exp(log_c + static_cast<double>(j) * log_p +
                    static_cast<double>(n - j) * log_q);
  }
  return std::min(sum, 1.0);
}

// One-sided exact upper confidence bound for a binomial proportion: the
// largest p with P[Bin(n,p) <= k] >= 1 - confidence, found by bisection.
// With k = 0 this solves (1-p)^n = 1 - confidence.
inline double clopper_pearson_upper(long violations, long n, double confidence = 0.95) {
  if (n < 1) throw std::invalid_argument("clopper_pearson_upper: n >= 1");
  if (violations < 0 || violations > n)
    throw std::invalid_argument("clopper_pearson_upper: k out of range");
  if (violations == n) return 1.0;
  const double alpha = 1.0 - confidence;
  double lo = static_cast<double>(violations) / static_cast<double>(n);
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (binomial_lower_tail(violations, n, mid) > alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Nearest-rank percentile of an unsorted sample, q in [0, 1].
inline double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile: empty sample");
  std::sort(values.begin(), values.end());
  double rank = q * static_cast<double>(values.size());
  long idx = static_cast<long>(std::ceil(rank)) - 1;
  idx = std::clamp<long>(idx, 0, static_cast<long>(values.size()) - 1);
  return values[static_cast<std::size_t>(idx)];
}

// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("ls_slope: need matched samples of size >= 2");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace stodyn
