#include <cmath>
#include <string>

#include "doctest.h"

#include "mfg/errors.hpp"
#include "mfg/oracle.hpp"
#include "mfg/quadrature.hpp"
#include "support.hpp"

using namespace mfg;

namespace {

double double_factorial(int m) {
  double r = 1.0;
  for (int j = m; j > 1; j -= 2) r *= j;
  return r;
}

ModelParams scaled(int n) {
  ModelParams p;
  p.n = n;
  p.T = 0.25 * n;
  p.lambda = 0.4;
  return p;
}

}  // namespace

TEST_CASE("Gauss-Hermite rule") {
  for (int G : {1, 2, 3, 8, 16, 32, 40, 64}) {
    const auto r = gauss_hermite(G);
    REQUIRE(r.nodes.size() == G);
    CHECK(std::abs(r.weights.sum() - 1.0) < 1e-12);
    CHECK(r.weights.minCoeff() > 0.0);
    for (int j = 0; j < G; ++j) CHECK(r.nodes(j) == -r.nodes(G - 1 - j));
    for (int j = 1; j < G; ++j) CHECK(r.nodes(j) > r.nodes(j - 1));
    for (int m = 0; m <= 2 * G - 1; ++m) {
      const double q = (r.weights.array() * r.nodes.array().pow(m)).sum();
      CAPTURE(G);
      CAPTURE(m);
      if (m % 2 == 1) {
        // Mirrored terms cancel up to rounding of the summation order.
        const double scale = (r.weights.array() * r.nodes.array().abs().pow(m)).sum();
        CHECK(std::abs(q) <= 1e-14 * scale);
      } else {
        const double exact = double_factorial(m - 1);
        CHECK(std::abs(q - exact) <= 1e-10 * exact);
      }
    }
  }
  // Three-point rule: nodes 0, +-sqrt(3), weights 2/3, 1/6.
  const auto r3 = gauss_hermite(3);
  CHECK(r3.nodes(2) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(r3.weights(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS(gauss_hermite(0));
}

TEST_CASE("tensor grid layout") {
  const auto q = make_quadrature_grid(2, 5);
  CHECK(q.size == 625);
  CHECK(q.block(0) == 625);
  CHECK(q.block(1) == 25);
  CHECK(q.block(2) == 1);
  CHECK(std::abs(q.weight.sum() - 1.0) < 1e-12);
  // Node 0 sits at the lowest node in every dimension.
  const double w0 = q.rule.weights(0);
  CHECK(q.weight(0) == doctest::Approx(w0 * w0 * w0 * w0).epsilon(1e-14));
  CHECK_THROWS_AS(make_quadrature_grid(3, 8), ParameterError);
  CHECK_THROWS_AS(make_quadrature_grid(1, 65), ParameterError);
}

TEST_CASE("deterministic case is one everywhere") {
  ModelParams p = test::deterministic(2, 2);
  p.T = 0.5;
  OracleOptions o;
  o.nodes = 12;
  const auto r = oracle_solve(p, o);
  CHECK((r.xi.array() == 1.0).all());
  REQUIRE(r.trace.size() == 1);
  CHECK(r.trace[0].residual == 0.0);
  CHECK(r.P1 == doctest::Approx(std::exp(p.mu * p.T)).epsilon(1e-14));
}

TEST_CASE("negligible emissions: xi is the normalized green tilt") {
  // With growth deterministic and emissions vanishing, the terminal value is
  // a constant and xi = Z^rho / E[Z^rho] = exp(rho lambda B2_T - rho^2 lambda^2 T / 2).
  for (int n : {1, 2}) {
    ModelParams p = test::deterministic(2, n);
    p.T = 0.25 * n;
    p.lambda = 0.4;
    p.rho = 0.5;
    p.c_bar = 1e-7;
    p.c2_bar = 1e-14;
    OracleOptions o;
    o.nodes = 16;
    const auto r = oracle_solve(p, o);
    const auto& q = r.grid;
    const double sh = std::sqrt(p.T / n);
    double worst = 0.0;
    for (Index i = 0; i < q.size; ++i) {
      Index rest = i;
      double b2 = 0.0;
      for (int d = 2 * n - 1; d >= 0; --d) {
        if (d % 2 == 1) b2 += sh * q.rule.nodes(rest % q.nodes_per_dim);
        rest /= q.nodes_per_dim;
      }
      const double expected =
          std::exp(p.rho * p.lambda * b2 - 0.5 * p.rho * p.rho * p.lambda * p.lambda * p.T);
      worst = std::max(worst, std::abs(r.xi(i) - expected) / expected);
    }
    CAPTURE(n);
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("oracle fixed point properties") {
  for (int n : {1, 2}) {
    const ModelParams p = scaled(n);
    OracleOptions o;
    o.nodes = n == 1 ? 32 : 16;
    const auto r = oracle_solve(p, o);
    CAPTURE(n);
    CHECK(std::abs(r.grid.weight.dot(r.xi) - 1.0) < 1e-13);
    CHECK(r.xi.minCoeff() > 0.0);
    CHECK(r.residual < 1e-10);
    const Eigen::VectorXd again = oracle_map(p, r.grid, r.xi);
    CHECK((again - r.xi).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(r.P1 > 0.0);
    CHECK(r.P2 > 0.0);
    CHECK(r.psi_bar.minCoeff() >= 0.0);
  }
}

TEST_CASE("damped and Picard iterations agree") {
  const ModelParams p = scaled(1);
  OracleOptions picard;
  OracleOptions damped;
  // The 2/(q+p) schedule converges only polynomially.
  damped.picard = false;
  damped.tol = 1e-7;
  const auto a = oracle_solve(p, picard);
  const auto b = oracle_solve(p, damped);
  CHECK(b.iterations > a.iterations);
  CHECK((a.xi - b.xi).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(a.P2 == doctest::Approx(b.P2).epsilon(1e-6));
}

TEST_CASE("quadrature level invariance") {
  for (int n : {1, 2}) {
    const ModelParams p = scaled(n);
    OracleOptions lo;
    OracleOptions hi;
    lo.nodes = 24;
    hi.nodes = 32;
    const auto a = oracle_solve(p, lo);
    const auto b = oracle_solve(p, hi);
    CAPTURE(n);
    CHECK(test::rel(a.P1, b.P1) < 1e-6);
    CHECK(test::rel(a.P2, b.P2) < 1e-6);
    CHECK(test::rel(a.psi_mean, b.psi_mean) < 1e-6);
    for (int k = 0; k <= n; ++k) {
      CHECK(test::rel(a.expected_emission(k), b.expected_emission(k)) < 1e-6);
    }
  }
}

TEST_CASE("non-convergence is reported") {
  const ModelParams p = scaled(1);
  OracleOptions o;
  o.max_iter = 2;
  try {
    oracle_solve(p, o);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }

  OracleOptions tight;
  tight.nodes = 64;
  tight.memory_budget_bytes = 1 << 10;
  CHECK_THROWS_AS(oracle_solve(p, tight), ResourceError);
}
