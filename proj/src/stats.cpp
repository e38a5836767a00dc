#include "mfg/stats.hpp"

#include <algorithm>
#include <cmath>

#include "mfg/errors.hpp"
#include "mfg/parallel.hpp"

namespace mfg::stats {

MeanSe mean_se(std::span<const double> x) {
  const auto n = static_cast<Index>(x.size());
  if (n == 0) throw UsageError("mean_se: empty sample");
  const double mean = blocked_mean(n, [&](Index i) { return x[static_cast<std::size_t>(i)]; });
  if (n == 1) return {mean, 0.0};
  const double ss = blocked_sum(n, [&](Index i) {
    const double d = x[static_cast<std::size_t>(i)] - mean;
    return d * d;
  });
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return {mean, sd / std::sqrt(static_cast<double>(n))};
}

MeanSe mean_se(const Eigen::Ref<const Eigen::VectorXd>& x) {
  return mean_se(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw UsageError("quantile: empty sample");
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return x[lo] + frac * (x[hi] - x[lo]);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw UsageError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_normal(std::vector<double> x) {
  if (x.empty()) throw UsageError("ks_normal: empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = normal_cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_1pct(double n) { return 1.628 / std::sqrt(n); }

}  // namespace mfg::stats
