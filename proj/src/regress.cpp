#include "mfg/regress.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/QR>

#include "mfg/errors.hpp"
#include "mfg/parallel.hpp"

namespace mfg {

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::markov: return "markov";
    case FeatureKind::markov_plus_accumulator: return "markov-plus-accumulator";
    case FeatureKind::increment_poly: return "increment-poly";
  }
  return "markov";
}

FeatureKind feature_kind_from_string(std::string_view name) {
  if (name == "markov") return FeatureKind::markov;
  if (name == "markov-plus-accumulator") return FeatureKind::markov_plus_accumulator;
  if (name == "increment-poly") return FeatureKind::increment_poly;
  throw ParameterError("kind", "unknown feature kind '" + std::string(name) + "'");
}

void validate(const FeatureSpec& spec) {
  if (spec.degree < 1 || spec.degree > 3) throw ParameterError("degree", "must be 1, 2 or 3");
  if (!(spec.ridge >= 0.0) || !std::isfinite(spec.ridge)) {
    throw ParameterError("ridge", "must be >= 0");
  }
}

namespace {

using Exponents = std::vector<std::vector<int>>;

// Exponent vectors of all monomials in `vars` variables with total degree
// <= degree, ordered by total degree, then by descending power of the
// earlier variables: 1, x, y, x^2, xy, y^2, ...
void monomials_of_degree(int vars, int total, std::vector<int>& prefix, Exponents& out) {
  if (static_cast<int>(prefix.size()) == vars - 1) {
    prefix.push_back(total);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int e = total; e >= 0; --e) {
    prefix.push_back(e);
    monomials_of_degree(vars, total - e, prefix, out);
    prefix.pop_back();
  }
}

Exponents monomials(int vars, int degree) {
  Exponents out;
  std::vector<int> prefix;
  for (int total = 0; total <= degree; ++total) monomials_of_degree(vars, total, prefix, out);
  return out;
}

// A_1 is the same on every path, so the accumulator enters from k = 2.
bool uses_accumulator(const FeatureSpec& spec, int k) {
  return spec.kind == FeatureKind::markov_plus_accumulator && k >= 2;
}

int markov_vars(const FeatureSpec& spec, int k) { return uses_accumulator(spec, k) ? 3 : 2; }

int increment_degree(const FeatureSpec& spec) { return std::min(spec.degree, 2); }

// Fills `row` (length feature_count) for one path at node k >= 1.
void fill_row(const PathEnsemble& e, const FeatureSpec& spec, const Exponents& exps, int k,
              const Eigen::VectorXd* acc, Index i, Eigen::VectorXd& row) {
  if (spec.kind == FeatureKind::increment_poly) {
    const int vars = 2 * k;
    Index c = 0;
    row(c++) = 1.0;
    auto x = [&](int a) { return (a % 2 == 0) ? e.eps1(i, a / 2) : e.eps2(i, a / 2); };
    for (int a = 0; a < vars; ++a) row(c++) = x(a);
    if (increment_degree(spec) >= 2) {
      for (int a = 0; a < vars; ++a) {
        const double xa = x(a);
        for (int b = a; b < vars; ++b) row(c++) = xa * x(b);
      }
    }
    return;
  }
  double vals[3] = {e.b1(i, k), e.b2(i, k), acc != nullptr ? (*acc)(i) : 0.0};
  for (std::size_t c = 0; c < exps.size(); ++c) {
    double m = 1.0;
    for (std::size_t v = 0; v < exps[c].size(); ++v) {
      for (int p = 0; p < exps[c][v]; ++p) m *= vals[v];
    }
    row(static_cast<Index>(c)) = m;
  }
}

Exponents exponents_for(const FeatureSpec& spec, int k) {
  if (spec.kind == FeatureKind::increment_poly) return {};
  return monomials(markov_vars(spec, k), spec.degree);
}

double eval_raw(const CondExpModel& m, const PathEnsemble& e, const Exponents& exps, Index i,
                Eigen::VectorXd& row) {
  switch (m.form) {
    case CondExpModel::Form::constant: return m.coef(0);
    case CondExpModel::Form::identity: return m.fitted(i);
    case CondExpModel::Form::linear: break;
  }
  const Eigen::VectorXd* acc =
      uses_accumulator(m.spec, m.k) ? &m.accumulator : nullptr;
  fill_row(e, m.spec, exps, m.k, acc, i, row);
  return row.dot(m.coef);
}

void check_priors(int k, std::span<const CondExpModel> prior) {
  if (static_cast<int>(prior.size()) < k) {
    throw UsageError("accumulator features at k=" + std::to_string(k) + " need fitted models for " +
                     "all earlier nodes, got " + std::to_string(prior.size()));
  }
}

}  // namespace

Index feature_count(const FeatureSpec& spec, int k) {
  if (k == 0) return 1;
  if (spec.kind == FeatureKind::increment_poly) {
    const Index vars = 2 * k;
    return 1 + vars + (increment_degree(spec) >= 2 ? vars * (vars + 1) / 2 : 0);
  }
  return static_cast<Index>(monomials(markov_vars(spec, k), spec.degree).size());
}

Eigen::VectorXd accumulator(const PathEnsemble& e, const GridSpec& grid, const ModelParams& params,
                            int k, std::span<const CondExpModel> prior) {
  check_priors(k, prior);
  const Index N = e.paths();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(N);
  for (int j = 0; j < k; ++j) {
    const double scale = grid.h * grid.w(j) * params.c2_bar;
    const auto& v = prior[static_cast<std::size_t>(j)];
    if (v.fitted.size() != N) throw UsageError("prior model fitted on a different ensemble");
    acc.array() += scale * (e.log_inv_alpha.col(j) - e.log_e0t.col(j)).array().exp() *
                   v.fitted.array();
  }
  return acc;
}

Eigen::MatrixXd build_features(const PathEnsemble& e, const GridSpec& grid,
                               const ModelParams& params, int k, const FeatureSpec& spec,
                               std::span<const CondExpModel> prior) {
  validate(spec);
  if (k < 0 || k > e.steps()) throw UsageError("node index out of range");
  const Index N = e.paths();
  if (k == 0) return Eigen::MatrixXd::Ones(N, 1);

  Eigen::VectorXd acc;
  if (uses_accumulator(spec, k)) acc = accumulator(e, grid, params, k, prior);
  const Exponents exps = exponents_for(spec, k);
  const Index d = feature_count(spec, k);
  Eigen::MatrixXd X(N, d);
  parallel_for(N, [&](Index i) {
    thread_local Eigen::VectorXd row;
    row.resize(d);
    fill_row(e, spec, exps, k, acc.size() ? &acc : nullptr, i, row);
    X.row(i) = row.transpose();
  });
  return X;
}

CondExpModel fit_cond_exp(const PathEnsemble& e, const GridSpec& grid, const ModelParams& params,
                          const Eigen::VectorXd& xi, int k, const FeatureSpec& spec,
                          std::span<const CondExpModel> prior) {
  validate(spec);
  const Index N = e.paths();
  if (xi.size() != N) throw UsageError("discount field size differs from ensemble");
  if (k < 0 || k > e.steps()) throw UsageError("node index out of range");

  CondExpModel m;
  m.k = k;
  m.spec = spec;
  const Eigen::VectorXd y = (e.log_ett.col(k).array().exp() * xi.array()).matrix();
  const double y_mean = blocked_mean(N, [&](Index i) { return y(i); });
  m.rmse_constant =
      std::sqrt(blocked_mean(N, [&](Index i) { return (y(i) - y_mean) * (y(i) - y_mean); }));

  if (k == e.steps()) {
    // Everything is known at the horizon and growth(T, T) = 1.
    m.form = CondExpModel::Form::identity;
    m.fitted = xi.cwiseMax(0.0);
    m.coef = Eigen::VectorXd::Zero(0);
    m.rmse = std::sqrt(blocked_mean(N, [&](Index i) {
      return (m.fitted(i) - y(i)) * (m.fitted(i) - y(i));
    }));
    return m;
  }
  if (k == 0 || y.minCoeff() == y.maxCoeff()) {
    // Trivial information at t_0, or a constant target: the mean is the
    // least-squares fit.
    m.form = CondExpModel::Form::constant;
    m.coef = Eigen::VectorXd::Constant(1, y_mean);
    m.fitted = Eigen::VectorXd::Constant(N, std::max(y_mean, 0.0));
    m.rmse = m.rmse_constant;
    return m;
  }

  m.form = CondExpModel::Form::linear;
  if (uses_accumulator(spec, k)) {
    m.accumulator = accumulator(e, grid, params, k, prior);
  }
  const Eigen::MatrixXd X = build_features(e, grid, params, k, spec, prior);
  const Index d = X.cols();

  // Gram matrix and right-hand side, one partial per block, summed in order.
  const Index blocks = block_count(N);
  std::vector<Eigen::MatrixXd> gram_part(static_cast<std::size_t>(blocks));
  std::vector<Eigen::VectorXd> rhs_part(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const Index start = b * kBlockSize;
    const Index len = std::min(N, start + kBlockSize) - start;
    const auto Xb = X.middleRows(start, len);
    gram_part[static_cast<std::size_t>(b)].noalias() = Xb.transpose() * Xb;
    rhs_part[static_cast<std::size_t>(b)].noalias() = Xb.transpose() * y.segment(start, len);
  }
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  for (Index b = 0; b < blocks; ++b) {
    gram += gram_part[static_cast<std::size_t>(b)];
    rhs += rhs_part[static_cast<std::size_t>(b)];
  }
  gram /= static_cast<double>(N);
  rhs /= static_cast<double>(N);
  // The intercept is not penalized, so the fit keeps the sample mean.
  for (Index j = 1; j < d; ++j) gram(j, j) += spec.ridge;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
  const auto R = qr.matrixR();
  const double r_max = std::abs(R(0, 0));
  const double r_min = std::abs(R(d - 1, d - 1));
  m.condition = r_min > 0.0 ? r_max / r_min : std::numeric_limits<double>::infinity();
  if (qr.rank() < d) {
    throw NumericalError("regression at k=" + std::to_string(k) +
                         " is rank deficient (condition estimate " +
                         std::to_string(m.condition) + ")");
  }
  m.coef = qr.solve(rhs);
  if (!m.coef.allFinite()) {
    throw NumericalError("regression at k=" + std::to_string(k) + " produced non-finite coefficients");
  }

  const Exponents exps = exponents_for(spec, k);
  m.fitted.resize(N);
  parallel_for(N, [&](Index i) {
    thread_local Eigen::VectorXd row;
    row.resize(d);
    m.fitted(i) = std::max(eval_raw(m, e, exps, i, row), 0.0);
  });
  m.rmse = std::sqrt(blocked_mean(N, [&](Index i) {
    return (m.fitted(i) - y(i)) * (m.fitted(i) - y(i));
  }));
  return m;
}

std::vector<CondExpModel> fit_all(const PathEnsemble& e, const GridSpec& grid,
                                  const ModelParams& params, const Eigen::VectorXd& xi,
                                  const FeatureSpec& spec) {
  std::vector<CondExpModel> models;
  models.reserve(static_cast<std::size_t>(e.steps() + 1));
  for (int k = 0; k <= e.steps(); ++k) {
    models.push_back(fit_cond_exp(e, grid, params, xi, k, spec, models));
  }
  return models;
}

double predict_raw(const CondExpModel& m, const PathEnsemble& e, Index path) {
  if (path < 0 || path >= e.paths()) throw UsageError("path index out of range");
  if (m.k > e.steps()) throw UsageError("model node beyond ensemble grid");
  const bool per_path = m.form == CondExpModel::Form::identity ||
                        uses_accumulator(m.spec, m.k);
  if (per_path && m.form != CondExpModel::Form::constant && m.fitted.size() != e.paths()) {
    throw UsageError("model was fitted on an ensemble of a different size");
  }
  if (m.form == CondExpModel::Form::linear && m.spec.kind == FeatureKind::increment_poly &&
      m.coef.size() != feature_count(m.spec, m.k)) {
    throw UsageError("coefficient count does not match feature basis");
  }
  Eigen::VectorXd row(std::max<Index>(m.coef.size(), 1));
  return eval_raw(m, e, exponents_for(m.spec, m.k), path, row);
}

double predict(const CondExpModel& m, const PathEnsemble& e, Index path) {
  return std::max(predict_raw(m, e, path), 0.0);
}

}  // namespace mfg
