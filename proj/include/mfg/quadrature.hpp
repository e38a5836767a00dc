#pragma once

#include <Eigen/Core>

namespace mfg {

/// Gauss-Hermite rule for the standard normal measure: sum_j w_j f(x_j)
/// approximates E[f(X)], X ~ N(0, 1), exactly for polynomials of degree
/// <= 2G - 1. Nodes ascend and are mirrored exactly; weights sum to one.
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Golub-Welsch eigenvalues refined by Newton on the orthonormal recurrence;
/// weights are Christoffel numbers 1 / sum_j p_j(x)^2. 1 <= G <= 256.
GaussHermiteRule gauss_hermite(int G);

}  // namespace mfg
