#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

namespace mfg {

using Index = Eigen::Index;

/// Two CARA investors: a regular one and a green one who prices under a tilted
/// measure. Wealths only matter for interpreting the aggregate green share.
struct InvestorParams {
  double gamma_r = 1.0;
  double gamma_g = 1.0;
  double lambda = 0.0;
  double w_r = 0.0;
  double w_g = 0.0;
};

struct Aggregates {
  double gamma_star;
  double rho;
};

/// Aggregate risk aversion 1/gamma* = 1/gamma_r + 1/gamma_g and green share
/// rho = gamma_r / (gamma_r + gamma_g). Throws ParameterError on nonpositive
/// risk aversion.
Aggregates derive_aggregates(const InvestorParams& inv);

/// Model, discretization and solver inputs. Defaults reproduce the reference
/// parameter table (T = 5, gamma* = 0.5, sigma0 = 10%, mu = 5%, ...).
struct ModelParams {
  double T = 5.0;
  double gamma_star = 0.5;
  double rho = 0.5;
  double lambda = 0.0;
  double gamma_pen = 0.3;
  double sigma0 = 0.1;
  double mu = 0.05;
  double v_bar = 1.0;
  double c_bar = 0.7;
  double c2_bar = 1.0;
  // Idiosyncratic volatility. Integrates out of every common-noise quantity,
  // so no computation reads it.
  double sigma_idio = 0.0;
  int n = 20;
  Index N = 50000;
  int p = 2;
  int n_iter = 10;
  std::uint64_t seed = 42;
};

/// Throws ParameterError naming the first violated constraint.
void validate(const ModelParams& params);

/// Stable 64-bit hash of every field of `params`.
std::uint64_t params_hash(const ModelParams& params);

/// Uniform time grid t_k = k h with trapezoid weights (1/2, 1, ..., 1, 1/2).
struct GridSpec {
  int n = 0;
  double h = 0.0;
  Eigen::VectorXd t;
  Eigen::VectorXd w;
};

GridSpec make_grid(double T, int n);

// Closed-form path factors. Each works on a scalar or on an Eigen array of
// Brownian values, so whole columns of an ensemble can be filled at once.

/// ln of the common-noise growth factor from 0 to t: sigma0 b1 + (mu - sigma0^2/2) t.
template <typename T>
auto log_growth_factor(const ModelParams& p, double t, const T& b1) {
  return p.sigma0 * b1 + (p.mu - 0.5 * p.sigma0 * p.sigma0) * t;
}

/// Growth factor from t to the horizon, given ln of the factors from 0 to t
/// and from 0 to T.
template <typename T, typename U>
auto growth_ratio(const T& log_e0t, const U& log_e0T) {
  using std::exp;
  return exp(log_e0T - log_e0t);
}

template <typename T>
auto growth_factor(const ModelParams& p, double t, const T& b1) {
  using std::exp;
  return exp(log_growth_factor(p, t, b1));
}

/// ln(1/alpha_t) for the penalty alpha_t = exp(gamma B2_t - gamma^2 t / 2).
template <typename T>
auto log_penalty_inverse_factor(const ModelParams& p, double t, const T& b2) {
  return -p.gamma_pen * b2 + 0.5 * p.gamma_pen * p.gamma_pen * t;
}

template <typename T>
auto penalty_inverse_factor(const ModelParams& p, double t, const T& b2) {
  using std::exp;
  return exp(log_penalty_inverse_factor(p, t, b2));
}

/// ln Z of the green investor's measure change, Z = exp(lambda B2_T - lambda^2 T / 2).
template <typename T>
auto green_density_logZ(const ModelParams& p, const T& b2_T) {
  return p.lambda * b2_T - 0.5 * p.lambda * p.lambda * p.T;
}

}  // namespace mfg
