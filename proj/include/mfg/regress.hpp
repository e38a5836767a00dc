#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "mfg/ensemble.hpp"
#include "mfg/model.hpp"

namespace mfg {

enum class FeatureKind {
  markov,                   // polynomial in (b1, b2) at t_k
  markov_plus_accumulator,  // polynomial in (b1, b2, A_k); A_1 is constant, so k = 1 uses (b1, b2)
  increment_poly,           // degree <= 2 monomials in all 2k increments
};

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view name);

struct FeatureSpec {
  FeatureKind kind = FeatureKind::markov;
  int degree = 2;
  double ridge = 1e-8;
};

/// Throws ParameterError unless degree is in {1, 2, 3} and ridge >= 0.
void validate(const FeatureSpec& spec);

/// Estimate of E[xi * growth(t_k, T) | F_{t_k}] on one ensemble.
///
/// k = 0 is a constant (the sample mean of the target), k = n is the identity
/// on xi, other indices are ridge least squares on a polynomial basis.
/// `fitted` holds the clamped predictions on the training ensemble and is
/// exactly what predict() returns path by path.
struct CondExpModel {
  enum class Form { constant, identity, linear };

  int k = 0;
  Form form = Form::constant;
  FeatureSpec spec;
  Eigen::VectorXd coef;
  Eigen::VectorXd accumulator;  // A_k per path, markov_plus_accumulator at k >= 2 only
  Eigen::VectorXd fitted;
  double rmse = 0.0;           // in-sample, after the clamp
  double rmse_constant = 0.0;  // in-sample RMSE of the mean model
  double condition = 1.0;      // |R_00 / R_dd| of the pivoted QR

  double operator()(Index path) const { return fitted(path); }
};

/// Number of basis columns for index k.
Index feature_count(const FeatureSpec& spec, int k);

/// Running emission integral known at t_k, built from the fits at earlier
/// nodes: A_k = h sum_{j<k} w_j c2_bar (1/alpha_j) v_j / growth(0, t_j).
Eigen::VectorXd accumulator(const PathEnsemble& ensemble, const GridSpec& grid,
                            const ModelParams& params, int k,
                            std::span<const CondExpModel> prior_models);

/// N x d basis matrix. Column 0 is the intercept; k = 0 yields only that
/// column. Throws UsageError if the accumulator kind lacks prior models.
Eigen::MatrixXd build_features(const PathEnsemble& ensemble, const GridSpec& grid,
                               const ModelParams& params, int k, const FeatureSpec& spec,
                               std::span<const CondExpModel> prior_models);

/// Fits the model for node k from the current discount factor samples.
/// Throws NumericalError if the normal equations stay singular after ridge.
CondExpModel fit_cond_exp(const PathEnsemble& ensemble, const GridSpec& grid,
                          const ModelParams& params, const Eigen::VectorXd& xi, int k,
                          const FeatureSpec& spec, std::span<const CondExpModel> prior_models);

/// Fits every node k = 0..n in order.
std::vector<CondExpModel> fit_all(const PathEnsemble& ensemble, const GridSpec& grid,
                                  const ModelParams& params, const Eigen::VectorXd& xi,
                                  const FeatureSpec& spec);

/// Clamped prediction for one path, evaluated from the basis and coefficients.
double predict(const CondExpModel& model, const PathEnsemble& ensemble, Index path);

/// Prediction before the clamp at zero.
double predict_raw(const CondExpModel& model, const PathEnsemble& ensemble, Index path);

}  // namespace mfg
