#include "mfg/quadrature.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

// Orthonormal probabilists' Hermite recurrence up to degree G. Returns p_G(x),
// stores p_{G-1}(x) and sum_{j<G} p_j(x)^2.
double orthonormal_hermite(int G, double x, double& p_prev, double& sum_sq) {
  double pm1 = 0.0;
  double p = 1.0;
  sum_sq = 0.0;
  for (int j = 0; j < G; ++j) {
    sum_sq += p * p;
    const double next = (x * p - std::sqrt(static_cast<double>(j)) * pm1) /
                        std::sqrt(static_cast<double>(j + 1));
    pm1 = p;
    p = next;
  }
  p_prev = pm1;
  return p;
}

}  // namespace

GaussHermiteRule gauss_hermite(int G) {
  if (G < 1 || G > 256) throw ParameterError("nodes", "Gauss-Hermite order must be in [1, 256]");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(G, G);
  for (int j = 1; j < G; ++j) {
    jacobi(j, j - 1) = jacobi(j - 1, j) = std::sqrt(static_cast<double>(j));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi, Eigen::EigenvaluesOnly);
  Eigen::VectorXd x = eig.eigenvalues();

  GaussHermiteRule rule;
  rule.nodes.resize(G);
  rule.weights.resize(G);
  for (int i = 0; i < G; ++i) {
    double xi = x(i);
    double p_prev = 0.0;
    double sum_sq = 0.0;
    for (int it = 0; it < 8; ++it) {
      const double p = orthonormal_hermite(G, xi, p_prev, sum_sq);
      // d/dx p_G = sqrt(G) p_{G-1}
      const double step = p / (std::sqrt(static_cast<double>(G)) * p_prev);
      xi -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(xi))) break;
    }
    orthonormal_hermite(G, xi, p_prev, sum_sq);
    rule.nodes(i) = xi;
    rule.weights(i) = 1.0 / sum_sq;
  }
  // Mirror so odd moments cancel exactly.
  for (int i = 0; i < G / 2; ++i) {
    const int j = G - 1 - i;
    const double node = 0.5 * (rule.nodes(j) - rule.nodes(i));
    const double weight = 0.5 * (rule.weights(i) + rule.weights(j));
    rule.nodes(i) = -node;
    rule.nodes(j) = node;
    rule.weights(i) = rule.weights(j) = weight;
  }
  if (G % 2 == 1) rule.nodes(G / 2) = 0.0;
  rule.weights /= rule.weights.sum();
  return rule;
}

}  // namespace mfg
