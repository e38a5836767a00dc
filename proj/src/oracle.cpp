#include "mfg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mfg/errors.hpp"
#include "mfg/solver.hpp"

namespace mfg {

Index QuadratureGrid::block(int k) const {
  Index b = 1;
  for (int j = 0; j < 2 * (n - k); ++j) b *= nodes_per_dim;
  return b;
}

QuadratureGrid make_quadrature_grid(int n, int nodes_per_dim) {
  if (n < 1 || n > 2) throw ParameterError("n", "oracle supports n in {1, 2}");
  if (nodes_per_dim < 1 || nodes_per_dim > 64) throw ParameterError("nodes", "must be in [1, 64]");
  QuadratureGrid q;
  q.n = n;
  q.nodes_per_dim = nodes_per_dim;
  q.rule = gauss_hermite(nodes_per_dim);
  q.size = q.block(0);
  q.weight.resize(q.size);
  const Index G = nodes_per_dim;
  for (Index i = 0; i < q.size; ++i) {
    double w = 1.0;
    Index rest = i;
    for (int d = 0; d < 2 * n; ++d) {
      w *= q.rule.weights(rest % G);
      rest /= G;
    }
    q.weight(i) = w;
  }
  return q;
}

namespace {

// Path factors on every tensor node, laid out like PathEnsemble columns.
struct NodeFactors {
  Eigen::MatrixXd log_ett;    // size x (n+1)
  Eigen::MatrixXd inv_alpha;  // size x (n+1)
  Eigen::MatrixXd vhat_factor;  // (1/alpha_k) growth(t_k, T)
  Eigen::VectorXd e0T;
  Eigen::VectorXd log_z;
};

NodeFactors node_factors(const ModelParams& p, const QuadratureGrid& q) {
  const int n = q.n;
  const GridSpec grid = make_grid(p.T, n);
  const double sqrt_h = std::sqrt(grid.h);
  const Index G = q.nodes_per_dim;
  NodeFactors f;
  f.log_ett.resize(q.size, n + 1);
  f.inv_alpha.resize(q.size, n + 1);
  f.vhat_factor.resize(q.size, n + 1);
  f.e0T.resize(q.size);
  f.log_z.resize(q.size);
  for (Index i = 0; i < q.size; ++i) {
    Index digits[4] = {0, 0, 0, 0};
    Index rest = i;
    for (int d = 2 * n - 1; d >= 0; --d) {
      digits[d] = rest % G;
      rest /= G;
    }
    double b1[3] = {0.0, 0.0, 0.0};
    double b2[3] = {0.0, 0.0, 0.0};
    for (int k = 1; k <= n; ++k) {
      b1[k] = b1[k - 1] + sqrt_h * q.rule.nodes(digits[2 * (k - 1)]);
      b2[k] = b2[k - 1] + sqrt_h * q.rule.nodes(digits[2 * (k - 1) + 1]);
    }
    const double log_e0T = log_growth_factor(p, grid.t(n), b1[n]);
    for (int k = 0; k <= n; ++k) {
      const double log_e0t = k == 0 ? 0.0 : log_growth_factor(p, grid.t(k), b1[k]);
      const double log_ia = log_penalty_inverse_factor(p, grid.t(k), b2[k]);
      f.log_ett(i, k) = log_e0T - log_e0t;
      f.inv_alpha(i, k) = std::exp(log_ia);
      f.vhat_factor(i, k) = std::exp(log_ia + log_e0T - log_e0t);
    }
    f.e0T(i) = std::exp(log_e0T);
    f.log_z(i) = green_density_logZ(p, b2[n]);
  }
  return f;
}

// Exact E[xi growth(t_k,T) | first k steps], one value per block of nodes.
// Every block shares the same trailing-digit weights, so a constant
// integrand gives bitwise-identical values across blocks.
std::vector<Eigen::VectorXd> cond_exps(const QuadratureGrid& q, const NodeFactors& f,
                                       const Eigen::VectorXd& xi) {
  const Index G = q.nodes_per_dim;
  std::vector<Eigen::VectorXd> v(static_cast<std::size_t>(q.n + 1));
  for (int k = 0; k <= q.n; ++k) {
    const Index B = q.block(k);
    Eigen::VectorXd tail(B);
    for (Index r = 0; r < B; ++r) {
      double w = 1.0;
      Index rest = r;
      for (int d = 0; d < 2 * (q.n - k); ++d) {
        w *= q.rule.weights(rest % G);
        rest /= G;
      }
      tail(r) = w;
    }
    const double den = tail.sum();
    const Index blocks = q.size / B;
    Eigen::VectorXd vk(blocks);
    for (Index m = 0; m < blocks; ++m) {
      // Centered on the first node, so a constant integrand comes back exactly.
      const double base = xi(m * B) * std::exp(f.log_ett(m * B, k));
      double num = 0.0;
      for (Index r = 0; r < B; ++r) {
        const Index i = m * B + r;
        num += tail(r) * (xi(i) * std::exp(f.log_ett(i, k)) - base);
      }
      vk(m) = base + num / den;
    }
    v[static_cast<std::size_t>(k)] = std::move(vk);
  }
  return v;
}

double at(const QuadratureGrid& q, const std::vector<Eigen::VectorXd>& v, int k, Index i) {
  return v[static_cast<std::size_t>(k)](i / q.block(k));
}

Eigen::VectorXd clearing(const ModelParams& p, const QuadratureGrid& q, const NodeFactors& f,
                         const std::vector<Eigen::VectorXd>& v) {
  const GridSpec grid = make_grid(p.T, q.n);
  Eigen::VectorXd s(q.size);
  double s_max = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < q.size; ++i) {
    double integral = 0.0;
    for (int k = 0; k <= q.n; ++k) integral += grid.w(k) * f.vhat_factor(i, k) * at(q, v, k, i);
    const double vhat = p.v_bar * f.e0T(i) + grid.h * p.c2_bar * integral;
    s(i) = -p.gamma_star * vhat + p.rho * f.log_z(i);
    s_max = std::max(s_max, s(i));
  }
  if (!std::isfinite(s_max)) throw NumericalError("oracle clearing exponent is not finite");
  Eigen::VectorXd eta = (s.array() - s_max).exp().matrix();
  // Weighted mean over the weight total: a constant field maps to exactly one.
  eta *= q.weight.sum() / q.weight.dot(eta);
  return eta;
}

void potential_terms(const ModelParams& p, const QuadratureGrid& q, const NodeFactors& f,
                     const Eigen::VectorXd& xi, const std::vector<Eigen::VectorXd>& v,
                     OracleIteration& rec) {
  const GridSpec grid = make_grid(p.T, q.n);
  double H = 0.0;
  double L = 0.0;
  for (Index i = 0; i < q.size; ++i) {
    const double x = xi(i);
    const double h = x > 0.0 ? x * (std::log(x) - p.rho * f.log_z(i) - 1.0) : 0.0;
    double quad = 0.0;
    for (int k = 0; k <= q.n; ++k) {
      const double vk = at(q, v, k, i);
      quad += grid.w(k) * f.inv_alpha(i, k) * vk * vk;
    }
    const double l = p.gamma_star * (x * p.v_bar * f.e0T(i) + grid.h * 0.5 * p.c2_bar * quad);
    H += q.weight(i) * h;
    L += q.weight(i) * l;
  }
  rec.H = H;
  rec.L = L;
  rec.G = H + L;
}

void check_budget(const QuadratureGrid& q, const OracleOptions& o) {
  const auto per_node = static_cast<std::uint64_t>(3 * (q.n + 1) + 6);
  const std::uint64_t bytes = static_cast<std::uint64_t>(q.size) * per_node * sizeof(double);
  if (bytes > o.memory_budget_bytes) throw ResourceError(bytes, o.memory_budget_bytes);
}

}  // namespace

Eigen::VectorXd oracle_map(const ModelParams& params, const QuadratureGrid& grid,
                           const Eigen::VectorXd& xi) {
  if (xi.size() != grid.size) throw UsageError("field size differs from quadrature grid");
  const NodeFactors f = node_factors(params, grid);
  return clearing(params, grid, f, cond_exps(grid, f, xi));
}

OracleResult oracle_solve(const ModelParams& params, const OracleOptions& options) {
  validate(params);
  OracleResult out;
  out.grid = make_quadrature_grid(params.n, options.nodes);
  const QuadratureGrid& q = out.grid;
  check_budget(q, options);
  const NodeFactors f = node_factors(params, q);

  Eigen::VectorXd xi = Eigen::VectorXd::Ones(q.size);
  bool picard = options.picard;
  double best = std::numeric_limits<double>::infinity();
  int q_damped = 0;
  int it = 0;
  for (; it < options.max_iter; ++it) {
    const auto v = cond_exps(q, f, xi);
    const Eigen::VectorXd eta = clearing(params, q, f, v);
    OracleIteration rec;
    rec.q = it;
    rec.residual = (eta - xi).cwiseAbs().maxCoeff();
    potential_terms(params, q, f, xi, v, rec);
    if (!std::isfinite(rec.residual)) throw NumericalError("oracle iteration produced non-finite values");
    if (rec.residual < options.tol) {
      rec.alpha = 0.0;
      out.trace.push_back(rec);
      out.residual = rec.residual;
      break;
    }
    if (picard && (rec.residual > 10.0 * best || it >= 500)) {
      // Divergence guard: restart with the damped schedule.
      picard = false;
      out.damped_fallback = true;
      xi.setOnes();
      best = std::numeric_limits<double>::infinity();
      continue;
    }
    best = std::min(best, rec.residual);
    rec.alpha = picard ? 1.0 : step_weight(q_damped++, params.p);
    out.trace.push_back(rec);
    if (picard) {
      xi = eta;
    } else {
      xi += rec.alpha * (eta - xi);
    }
    out.residual = rec.residual;
  }
  out.iterations = it;
  if (it >= options.max_iter) {
    throw NumericalError("oracle did not converge in " + std::to_string(options.max_iter) +
                         " iterations, residual " + std::to_string(out.residual));
  }

  const GridSpec grid = make_grid(params.T, q.n);
  const auto v = cond_exps(q, f, xi);
  out.xi = xi;
  out.P1 = v[0](0);
  out.psi_bar.resize(q.size);
  double p2 = 0.0;
  for (Index i = 0; i < q.size; ++i) {
    double psi = 0.0;
    double sq = 0.0;
    for (int k = 0; k <= q.n; ++k) {
      const double vk = at(q, v, k, i);
      psi += grid.w(k) * f.inv_alpha(i, k) * vk;
      sq += grid.w(k) * f.inv_alpha(i, k) * vk * vk;
    }
    out.psi_bar(i) = grid.h * params.c_bar * psi;
    p2 += q.weight(i) * grid.h * sq;
  }
  out.P2 = p2;
  out.psi_mean = q.weight.dot(out.psi_bar);
  out.expected_emission.resize(q.n + 1);
  for (int k = 0; k <= q.n; ++k) {
    out.expected_emission(k) =
        params.c_bar * (q.weight.array() * xi.array() * f.vhat_factor.col(k).array()).sum();
  }
  return out;
}

}  // namespace mfg
