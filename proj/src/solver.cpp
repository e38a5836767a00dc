#include "mfg/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "mfg/errors.hpp"
#include "mfg/parallel.hpp"

namespace mfg {

namespace {

void check_models(std::span<const CondExpModel> models, const PathEnsemble& e) {
  if (static_cast<int>(models.size()) != e.steps() + 1) {
    throw UsageError("expected one fitted model per grid node");
  }
  for (const auto& m : models) {
    if (m.fitted.size() != e.paths()) throw UsageError("model fitted on a different ensemble");
  }
}

void check_finite(const Eigen::VectorXd& v, const char* what, int iteration) {
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i))) {
      throw NumericalError(std::string(what) + " is not finite at iteration " +
                           std::to_string(iteration) + ", path " + std::to_string(i));
    }
  }
}

}  // namespace

TerminalValueField terminal_value(const PathEnsemble& e, std::span<const CondExpModel> models,
                                  const ModelParams& params, const GridSpec& grid) {
  check_models(models, e);
  const int n = e.steps();
  TerminalValueField out;
  out.vhat.resize(e.paths());
  parallel_for(e.paths(), [&](Index i) {
    double integral = 0.0;
    for (int k = 0; k <= n; ++k) {
      // (1/alpha_k) growth(t_k, T) combined in log space.
      const double factor = std::exp(e.log_inv_alpha(i, k) + e.log_ett(i, k));
      integral += grid.w(k) * factor * models[static_cast<std::size_t>(k)].fitted(i);
    }
    out.vhat(i) = params.v_bar * std::exp(e.log_e0t(i, n)) + grid.h * params.c2_bar * integral;
  });
  return out;
}

DiscountField clearing_map(const PathEnsemble& e, const TerminalValueField& vhat,
                           const ModelParams& params) {
  const Index N = e.paths();
  if (vhat.vhat.size() != N) throw UsageError("terminal value size differs from ensemble");
  const Eigen::VectorXd s =
      (-params.gamma_star * vhat.vhat.array() + params.rho * e.log_z.array()).matrix();
  double s_max = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < N; ++i) s_max = std::max(s_max, s(i));
  if (!std::isfinite(s_max)) throw NumericalError("clearing map exponent is not finite");

  DiscountField eta;
  eta.xi = (s.array() - s_max).exp().matrix();
  const double mean = blocked_mean(N, [&](Index i) { return eta.xi(i); });
  eta.xi /= mean;
  return eta;
}

DiscountField damped_update(const DiscountField& xi, const DiscountField& eta, int q, int p) {
  if (xi.xi.size() != eta.xi.size()) throw UsageError("field sizes differ");
  const double a = step_weight(q, p);
  DiscountField next;
  next.iteration = xi.iteration + 1;
  if (a == 1.0) {
    next.xi = eta.xi;
  } else {
    // Increment form: leaves xi unchanged bit for bit when eta == xi.
    next.xi = xi.xi + a * (eta.xi - xi.xi);
  }
  return next;
}

PotentialValue potential(const PathEnsemble& e, const DiscountField& field,
                         std::span<const CondExpModel> models, const ModelParams& params,
                         const GridSpec& grid) {
  check_models(models, e);
  const Index N = e.paths();
  const Eigen::VectorXd& xi = field.xi;
  if (xi.size() != N) throw UsageError("discount field size differs from ensemble");
  for (Index i = 0; i < N; ++i) {
    if (xi(i) < 0.0) {
      throw InvariantError("discount factor is negative at path " + std::to_string(i));
    }
  }
  const int n = e.steps();

  // Per-path contributions, so the standard error comes for free.
  Eigen::VectorXd h_term(N);
  Eigen::VectorXd l_term(N);
  parallel_for(N, [&](Index i) {
    const double x = xi(i);
    // Z^rho h(x / Z^rho) = x (ln x - rho ln Z - 1), and 0 at x = 0.
    h_term(i) = x > 0.0 ? x * (std::log(x) - params.rho * e.log_z(i) - 1.0) : 0.0;
    double quad = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double v = models[static_cast<std::size_t>(k)].fitted(i);
      quad += grid.w(k) * e.inv_alpha(i, k) * v * v;
    }
    l_term(i) = params.gamma_star * (x * params.v_bar * std::exp(e.log_e0t(i, n)) +
                                     grid.h * 0.5 * params.c2_bar * quad);
  });

  PotentialValue out;
  out.H = blocked_mean(N, [&](Index i) { return h_term(i); });
  out.L = blocked_mean(N, [&](Index i) { return l_term(i); });
  out.G = out.H + out.L;
  const double ss = blocked_sum(N, [&](Index i) {
    const double d = h_term(i) + l_term(i) - out.G;
    return d * d;
  });
  out.G_se = std::sqrt(ss / static_cast<double>(N - 1) / static_cast<double>(N));
  out.H_bound = -blocked_mean(N, [&](Index i) { return std::exp(params.rho * e.log_z(i)); });
  return out;
}

SolveResult solve(const PathEnsemble& e, const ModelParams& params, const GridSpec& grid,
                  const SolveOptions& options) {
  validate(params);
  validate(options.features);
  if (e.steps() != params.n || grid.n != params.n) throw UsageError("grid does not match params.n");
  using clock = std::chrono::steady_clock;

  SolveResult result;
  DiscountField xi;
  xi.xi = Eigen::VectorXd::Ones(e.paths());
  if (options.keep_history) result.history.push_back(xi.xi);

  for (int q = 0; q <= params.n_iter; ++q) {
    const auto start = clock::now();
    auto models = fit_all(e, grid, params, xi.xi, options.features);
    const PotentialValue g = potential(e, xi, models, params, grid);
    const TerminalValueField vhat = terminal_value(e, models, params, grid);
    check_finite(vhat.vhat, "terminal value", q);
    const DiscountField eta = clearing_map(e, vhat, params);
    check_finite(eta.xi, "clearing map output", q);

    TraceRecord rec;
    rec.q = q;
    rec.alpha = step_weight(q, params.p);
    rec.potential = g;
    rec.residual = blocked_mean(e.paths(), [&](Index i) { return std::abs(eta.xi(i) - xi.xi(i)); });

    if (q == params.n_iter) {
      result.models = std::move(models);
    } else {
      xi = damped_update(xi, eta, q, params.p);
      check_finite(xi.xi, "discount factor", q);
      if (options.keep_history) result.history.push_back(xi.xi);
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
    result.trace.push_back(rec);
  }
  result.xi = std::move(xi);
  return result;
}

}  // namespace mfg
