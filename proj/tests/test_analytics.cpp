#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"

#include "mfg/analytics.hpp"
#include "mfg/ensemble.hpp"
#include "mfg/solver.hpp"
#include "mfg/stats.hpp"
#include "support.hpp"

using namespace mfg;

namespace {

struct Solved {
  ModelParams params;
  GridSpec grid;
  PathEnsemble ensemble;
  SolveResult result;
};

Solved solved(const ModelParams& p) {
  Solved s{p, make_grid(p.T, p.n), {}, {}};
  s.ensemble = simulate_paths(p, s.grid);
  s.result = solve(s.ensemble, p, s.grid);
  return s;
}

double trapezoid(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  double s = 0.0;
  for (Index i = 1; i < x.size(); ++i) s += 0.5 * (x(i) - x(i - 1)) * (y(i) + y(i - 1));
  return s;
}

double interpolate(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double at) {
  for (Index i = 1; i < x.size(); ++i) {
    if (x(i) >= at) {
      const double f = (at - x(i - 1)) / (x(i) - x(i - 1));
      return (1.0 - f) * y(i - 1) + f * y(i);
    }
  }
  return y(y.size() - 1);
}

}  // namespace

TEST_CASE("deterministic emissions and prices") {
  const auto s = solved(test::deterministic(1000));
  const auto& p = s.params;
  const auto& g = s.grid;
  const auto em = total_emissions(s.ensemble, s.result.models, p, g);

  // C (e^{mu T} - 1) / mu, and its trapezoid counterpart.
  const double exact = p.c_bar * (std::exp(p.mu * p.T) - 1.0) / p.mu;
  CHECK(exact == doctest::Approx(3.9764).epsilon(1e-4));
  double trap = 0.0;
  for (int k = 0; k <= p.n; ++k) trap += g.w(k) * std::exp(p.mu * (p.T - g.t(k)));
  trap *= g.h * p.c_bar;
  for (Index i = 0; i < p.N; ++i) CHECK(em.samples(i) == em.samples(0));
  CHECK(test::rel(em.samples(0), exact) < 5e-3);
  CHECK(em.samples(0) == doctest::Approx(trap).epsilon(1e-13));

  const auto curve = expected_emission_curve(s.ensemble, s.result.xi, s.result.models, p, g);
  for (int k = 0; k <= p.n; ++k) {
    const double e_k = p.c_bar * std::exp(p.mu * (p.T - g.t(k)));
    CHECK(curve.direct(k) == doctest::Approx(e_k).epsilon(1e-13));
    CHECK(curve.regression(k) == doctest::Approx(e_k).epsilon(1e-13));
  }
  CHECK(curve.direct(0) == doctest::Approx(0.8988).epsilon(1e-4));

  const auto prices = price_components(s.ensemble, s.result.xi, s.result.models, p, g);
  CHECK(test::rel(prices.P1, std::exp(0.25)) < 2e-3);
  CHECK(test::rel(prices.P2, (std::exp(0.5) - 1.0) / 0.1) < 5e-3);
  CHECK(prices.P2 == doctest::Approx(6.48721).epsilon(5e-3));
}

TEST_CASE("zero emission efficacy gives zero emissions") {
  auto s = solved(test::small(500, 4));
  s.params.c_bar = 0.0;
  const auto em = total_emissions(s.ensemble, s.result.models, s.params, s.grid);
  CHECK((em.samples.array() == 0.0).all());
}

TEST_CASE("emission identities on a stochastic solution") {
  ModelParams p = test::small(20000, 10);
  p.lambda = 0.2;
  const auto s = solved(p);
  const auto& g = s.grid;
  const auto em = total_emissions(s.ensemble, s.result.models, p, g);
  CHECK(em.samples.minCoeff() >= 0.0);
  const auto curve = expected_emission_curve(s.ensemble, s.result.xi, s.result.models, p, g);

  // Last node: growth(T, T) = 1.
  const double e_n =
      p.c_bar * (s.result.xi.xi.array() * s.ensemble.inv_alpha.col(p.n).array()).mean();
  CHECK(curve.direct(p.n) == doctest::Approx(e_n).epsilon(1e-12));

  // Tower cross-check of the emission total against the regression curve.
  const auto m = stats::mean_se(em.samples);
  double from_curve = 0.0;
  for (int k = 0; k <= p.n; ++k) from_curve += g.w(k) * curve.regression(k);
  from_curve *= g.h;
  CHECK(std::abs(m.mean - from_curve) <= 3.0 * m.se);

  for (int k = 0; k <= p.n; ++k) {
    const double se = std::hypot(curve.direct_se(k), curve.regression_se(k));
    CAPTURE(k);
    CHECK(std::abs(curve.direct(k) - curve.regression(k)) <= 3.0 * se);
  }
}

TEST_CASE("price decomposition is linear") {
  const auto s = solved(test::small(4000, 6));
  const auto pr = price_components(s.ensemble, s.result.xi, s.result.models, s.params, s.grid);
  CHECK(pr.P1 > 0.0);
  CHECK(pr.P2 > 0.0);
  CHECK(pr.price(1.0, 0.0) == pr.P1);
  CHECK(pr.price(0.0, 1.0) == pr.P2);
  CHECK(pr.price(2.0, 3.0) == doctest::Approx(2.0 * pr.P1 + 3.0 * pr.P2));

  // P1 is the node-0 fit, the sample mean of xi times the total growth.
  const double direct =
      (s.result.xi.xi.array() * s.ensemble.log_e0t.col(s.params.n).array().exp()).mean();
  CHECK(pr.P1 == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("repetition standard errors") {
  std::vector<PriceDecomposition> reps{{1.0, 6.0}, {1.2, 6.4}, {1.1, 6.2}, {1.3, 6.6}};
  const auto c = combine_repetitions(reps);
  CHECK(c.P1 == doctest::Approx(1.15));
  CHECK(c.P2 == doctest::Approx(6.3));
  const double sd1 = std::sqrt((0.0225 + 0.0025 + 0.0025 + 0.0225) / 3.0);
  CHECK(c.P1_se == doctest::Approx(sd1 / 2.0).epsilon(1e-12));
  CHECK(c.P2_se == doctest::Approx(2.0 * sd1 / 2.0).epsilon(1e-12));
}

TEST_CASE("kernel density of normal samples") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  std::vector<double> x(50000);
  for (auto& v : x) v = z(rng);
  const auto kde = kde_smooth(x);
  CHECK_FALSE(kde.point_mass);
  CHECK(kde.bandwidth == doctest::Approx(silverman_bandwidth(x)));
  const double at0 = interpolate(kde.grid, kde.density, 0.0);
  CHECK(test::rel(at0, 1.0 / std::sqrt(2.0 * std::numbers::pi)) < 0.05);
  CHECK(std::abs(trapezoid(kde.grid, kde.density) - 1.0) < 1e-3);
  CHECK(kde.grid(0) == doctest::Approx(*std::min_element(x.begin(), x.end()) - 3 * kde.bandwidth));
}

TEST_CASE("kernel density edge cases") {
  std::vector<double> same{0.0, 0.0};
  const auto k = kde_smooth(same);
  CHECK(k.point_mass);
  CHECK(k.location == 0.0);

  std::vector<double> two{1.0, 3.0};
  const auto k2 = kde_smooth(two, 0.5, 2001);
  CHECK_FALSE(k2.point_mass);
  CHECK(k2.bandwidth == 0.5);
  CHECK(std::abs(trapezoid(k2.grid, k2.density) - 1.0) < 1e-3);

  // 0.9 min(sd, IQR / 1.34) n^(-1/5) by hand.
  std::vector<double> v{1.0, 2.0, 3.0, 4.0, 10.0};
  const double sd = std::sqrt((9.0 + 4.0 + 1.0 + 0.0 + 36.0) / 4.0);
  const double iqr = 4.0 - 2.0;
  CHECK(silverman_bandwidth(v) ==
        doctest::Approx(0.9 * std::min(sd, iqr / 1.34) * std::pow(5.0, -0.2)));
}
