#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace mfg::stats {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(count)
};

/// Sample mean and its standard error; deterministic blocked summation.
MeanSe mean_se(const Eigen::Ref<const Eigen::VectorXd>& x);
MeanSe mean_se(std::span<const double> x);

double normal_cdf(double x);

/// Linear-interpolated empirical quantile, q in [0, 1].
double quantile(std::vector<double> x, double q);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sample KS statistic of x against the standard normal.
double ks_normal(std::vector<double> x);

/// Asymptotic one-sample KS critical value at level 1% (1.628 / sqrt(n)).
double ks_critical_1pct(double n);

}  // namespace mfg::stats
