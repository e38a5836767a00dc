#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "mfg/ensemble.hpp"
#include "mfg/model.hpp"
#include "mfg/regress.hpp"

namespace mfg {

/// Candidate stochastic discount factor, one nonnegative value per path with
/// sample mean one.
struct DiscountField {
  Eigen::VectorXd xi;
  int iteration = 0;
};

/// Discretized conditional mean of the terminal firm value, per path.
struct TerminalValueField {
  Eigen::VectorXd vhat;
};

struct PotentialValue {
  double H = 0.0;        // entropy term
  double L = 0.0;        // linear-quadratic term
  double G = 0.0;        // H + L
  double G_se = 0.0;     // Monte-Carlo standard error of G
  double H_bound = 0.0;  // -(1/N) sum Z^rho, lower bound for H
};

struct TraceRecord {
  int q = 0;
  double alpha = 0.0;
  PotentialValue potential;
  double residual = 0.0;  // (1/N) sum |eta_q - xi_q|
  double wall_ms = 0.0;
};

using PotentialTrace = std::vector<TraceRecord>;

/// Step weight 2 / (q + p) of the damped iteration.
inline double step_weight(int q, int p) { return 2.0 / static_cast<double>(q + p); }

/// Trapezoid estimate of the conditional terminal firm value:
/// v_bar growth(0,T) + h sum_k w_k c2_bar (1/alpha_k) growth(t_k,T) v_k.
TerminalValueField terminal_value(const PathEnsemble& ensemble,
                                  std::span<const CondExpModel> models,
                                  const ModelParams& params, const GridSpec& grid);

/// Market-clearing map: eta_i proportional to exp(-gamma* vhat_i + rho ln Z_i),
/// normalized to sample mean one in log-sum-exp form.
DiscountField clearing_map(const PathEnsemble& ensemble, const TerminalValueField& vhat,
                           const ModelParams& params);

/// xi_{q+1} = a eta + (1 - a) xi with a = 2 / (q + p).
DiscountField damped_update(const DiscountField& xi, const DiscountField& eta, int q, int p);

/// Empirical potential of `xi`, with v_k the fits to that same field.
/// Throws InvariantError on a negative entry.
PotentialValue potential(const PathEnsemble& ensemble, const DiscountField& xi,
                         std::span<const CondExpModel> models, const ModelParams& params,
                         const GridSpec& grid);

struct SolveOptions {
  FeatureSpec features;
  // Keep xi_0 .. xi_{n_iter} for distribution diagnostics.
  bool keep_history = false;
};

/// Result of the damped fixed-point iteration. `models` are fitted to the
/// final field, and `trace` has n_iter + 1 records: sweeps q = 0..n_iter-1
/// plus the evaluation of the final iterate (q = n_iter, step not applied).
struct SolveResult {
  DiscountField xi;
  std::vector<CondExpModel> models;
  PotentialTrace trace;
  std::vector<Eigen::VectorXd> history;
};

/// Runs n_iter sweeps from xi = 1: fit all nodes, terminal value, clearing
/// map, damped step. Throws NumericalError naming the iteration and path of
/// the first non-finite value.
SolveResult solve(const PathEnsemble& ensemble, const ModelParams& params, const GridSpec& grid,
                  const SolveOptions& options = {});

}  // namespace mfg
