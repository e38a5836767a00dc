#include "mfg/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfg/errors.hpp"
#include "mfg/parallel.hpp"
#include "mfg/stats.hpp"

namespace mfg {

EmissionDistribution total_emissions(const PathEnsemble& e, std::span<const CondExpModel> models,
                                     const ModelParams& params, const GridSpec& grid) {
  if (static_cast<int>(models.size()) != e.steps() + 1) {
    throw UsageError("expected one fitted model per grid node");
  }
  EmissionDistribution out;
  out.samples.resize(e.paths());
  parallel_for(e.paths(), [&](Index i) {
    double s = 0.0;
    for (int k = 0; k <= e.steps(); ++k) {
      s += grid.w(k) * e.inv_alpha(i, k) * models[static_cast<std::size_t>(k)].fitted(i);
    }
    out.samples(i) = grid.h * params.c_bar * s;
  });
  return out;
}

EmissionCurve expected_emission_curve(const PathEnsemble& e, const DiscountField& xi,
                                      std::span<const CondExpModel> models,
                                      const ModelParams& params, const GridSpec& grid) {
  if (static_cast<int>(models.size()) != e.steps() + 1) {
    throw UsageError("expected one fitted model per grid node");
  }
  const int n = e.steps();
  const Index N = e.paths();
  EmissionCurve c;
  c.t = grid.t;
  c.direct.resize(n + 1);
  c.direct_se.resize(n + 1);
  c.regression.resize(n + 1);
  c.regression_se.resize(n + 1);
  Eigen::VectorXd tmp(N);
  for (int k = 0; k <= n; ++k) {
    tmp = params.c_bar *
          (xi.xi.array() * (e.log_inv_alpha.col(k) + e.log_ett.col(k)).array().exp()).matrix();
    const auto d = stats::mean_se(tmp);
    c.direct(k) = d.mean;
    c.direct_se(k) = d.se;
    tmp = params.c_bar *
          (e.inv_alpha.col(k).array() * models[static_cast<std::size_t>(k)].fitted.array()).matrix();
    const auto r = stats::mean_se(tmp);
    c.regression(k) = r.mean;
    c.regression_se(k) = r.se;
  }
  return c;
}

PriceDecomposition price_components(const PathEnsemble& e, const DiscountField& xi,
                                    std::span<const CondExpModel> models,
                                    const ModelParams& params, const GridSpec& grid) {
  (void)params;
  if (static_cast<int>(models.size()) != e.steps() + 1) {
    throw UsageError("expected one fitted model per grid node");
  }
  const Index N = e.paths();
  PriceDecomposition out;
  const CondExpModel& v0 = models.front();
  out.P1 = v0.form == CondExpModel::Form::constant ? v0.coef(0) : v0.fitted.mean();
  Eigen::VectorXd first = (xi.xi.array() * e.log_e0t.col(e.steps()).array().exp()).matrix();
  out.P1_se = stats::mean_se(first).se;

  Eigen::VectorXd per_path(N);
  parallel_for(N, [&](Index i) {
    double s = 0.0;
    for (int k = 0; k <= e.steps(); ++k) {
      const double v = models[static_cast<std::size_t>(k)].fitted(i);
      s += grid.w(k) * e.inv_alpha(i, k) * v * v;
    }
    per_path(i) = grid.h * s;
  });
  const auto p2 = stats::mean_se(per_path);
  out.P2 = p2.mean;
  out.P2_se = p2.se;
  return out;
}

PriceDecomposition combine_repetitions(std::span<const PriceDecomposition> reps) {
  if (reps.empty()) throw UsageError("no repetitions to combine");
  std::vector<double> p1;
  std::vector<double> p2;
  for (const auto& r : reps) {
    p1.push_back(r.P1);
    p2.push_back(r.P2);
  }
  const auto a = stats::mean_se(p1);
  const auto b = stats::mean_se(p2);
  return {a.mean, b.mean, a.se, b.se};
}

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) throw UsageError("bandwidth needs at least two samples");
  const auto ms = stats::mean_se(samples);
  const double n = static_cast<double>(samples.size());
  const double sd = ms.se * std::sqrt(n);
  std::vector<double> v(samples.begin(), samples.end());
  const double iqr = stats::quantile(v, 0.75) - stats::quantile(v, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  return 0.9 * spread * std::pow(n, -0.2);
}

KdeResult kde_smooth(std::span<const double> samples, double bandwidth, int points) {
  if (samples.size() < 2) throw UsageError("kde needs at least two samples");
  if (points < 2) throw UsageError("kde grid needs at least two points");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  KdeResult out;
  if (lo == hi) {
    out.point_mass = true;
    out.location = lo;
    out.grid = Eigen::VectorXd::Constant(1, lo);
    out.density = Eigen::VectorXd::Ones(1);
    return out;
  }
  const double bw = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(samples);
  out.bandwidth = bw;
  out.grid = Eigen::VectorXd::LinSpaced(points, lo - 3.0 * bw, hi + 3.0 * bw);
  out.density.resize(points);
  const auto count = static_cast<Index>(samples.size());
  const double norm = 1.0 / (static_cast<double>(count) * bw * std::sqrt(2.0 * std::numbers::pi));
  for (int g = 0; g < points; ++g) {
    const double x = out.grid(g);
    out.density(g) = norm * blocked_sum(count, [&](Index i) {
      const double z = (x - samples[static_cast<std::size_t>(i)]) / bw;
      return std::exp(-0.5 * z * z);
    });
  }
  // Kernel mass beyond 3 bw of the extreme samples is cut off; with few
  // samples that loss exceeds 1e-3, so rescale to unit trapezoid integral.
  const double dx = out.grid(1) - out.grid(0);
  const double mass = dx * (out.density.sum() - 0.5 * (out.density(0) + out.density(points - 1)));
  out.density /= mass;
  return out;
}

}  // namespace mfg
