#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "mfg/ensemble.hpp"
#include "mfg/model.hpp"
#include "mfg/regress.hpp"
#include "mfg/solver.hpp"

namespace mfg {

/// Per-scenario total average emissions over [0, T].
struct EmissionDistribution {
  Eigen::VectorXd samples;
};

/// psi_bar_i = h sum_k w_k c_bar (1/alpha_k) v_k(i).
EmissionDistribution total_emissions(const PathEnsemble& ensemble,
                                     std::span<const CondExpModel> models,
                                     const ModelParams& params, const GridSpec& grid);

/// Expected emissions of the representative firm at each node, two ways:
/// directly from xi (c_bar E[xi (1/alpha_k) growth(t_k,T)]) and from the
/// fitted conditional expectations (c_bar E[(1/alpha_k) v_k]).
struct EmissionCurve {
  Eigen::VectorXd t;
  Eigen::VectorXd direct;
  Eigen::VectorXd direct_se;
  Eigen::VectorXd regression;
  Eigen::VectorXd regression_se;
};

EmissionCurve expected_emission_curve(const PathEnsemble& ensemble, const DiscountField& xi,
                                      std::span<const CondExpModel> models,
                                      const ModelParams& params, const GridSpec& grid);

/// Initial share price S_0 = V * P1 + C0^2 * P2.
struct PriceDecomposition {
  double P1 = 0.0;
  double P2 = 0.0;
  double P1_se = 0.0;
  double P2_se = 0.0;

  double price(double firm_value, double c0_squared) const { return firm_value * P1 + c0_squared * P2; }
};

/// P1 is the node-0 constant fit; P2 = (h/N) sum_i sum_k w_k (1/alpha_k) v_k(i)^2.
/// Standard errors here are within-ensemble; see combine_repetitions for the
/// across-seed version.
PriceDecomposition price_components(const PathEnsemble& ensemble, const DiscountField& xi,
                                    std::span<const CondExpModel> models,
                                    const ModelParams& params, const GridSpec& grid);

/// Mean of repeated estimates with SE = sample sd / sqrt(R).
PriceDecomposition combine_repetitions(std::span<const PriceDecomposition> reps);

struct KdeResult {
  Eigen::VectorXd grid;
  Eigen::VectorXd density;
  double bandwidth = 0.0;
  // Zero-variance input: the density is a point mass at `location` and the
  // grid/density vectors hold that single point with unit mass.
  bool point_mass = false;
  double location = 0.0;
};

/// Silverman rule of thumb: 0.9 min(sd, IQR / 1.34) n^(-1/5).
double silverman_bandwidth(std::span<const double> samples);

/// Gaussian KDE on `points` evenly spaced nodes over [min - 3 bw, max + 3 bw],
/// rescaled so its trapezoid integral over the grid is one.
/// A nonpositive bandwidth selects Silverman's rule.
KdeResult kde_smooth(std::span<const double> samples, double bandwidth = 0.0, int points = 512);

}  // namespace mfg
