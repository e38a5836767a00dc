#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "mfg/model.hpp"
#include "mfg/quadrature.hpp"

namespace mfg {

/// Full tensor Gauss-Hermite grid over the 2n common-noise increments.
///
/// Node i has digits (d_0, ..., d_{2n-1}) in base G, most significant first;
/// digit 2(j-1) indexes the growth increment of step j and digit 2(j-1)+1 the
/// penalty increment. Conditioning on the first k steps therefore groups
/// nodes into contiguous blocks of G^(2(n-k)).
struct QuadratureGrid {
  int n = 0;
  int nodes_per_dim = 0;
  GaussHermiteRule rule;
  Index size = 0;
  Eigen::VectorXd weight;  // joint weight, sums to one

  Index block(int k) const;  // G^(2(n-k))
};

QuadratureGrid make_quadrature_grid(int n, int nodes_per_dim);

struct OracleOptions {
  int nodes = 32;
  // Plain Picard iteration; falls back to the damped 2/(q+p) schedule if the
  // residual grows.
  bool picard = true;
  int max_iter = 10000;
  double tol = 1e-10;
  std::uint64_t memory_budget_bytes = std::uint64_t{8} << 30;
};

struct OracleIteration {
  int q = 0;
  double alpha = 1.0;
  double residual = 0.0;  // sup |eta - xi| over nodes
  double H = 0.0;
  double L = 0.0;
  double G = 0.0;
};

struct OracleResult {
  QuadratureGrid grid;
  Eigen::VectorXd xi;       // converged discount factor per node
  Eigen::VectorXd psi_bar;  // total average emissions per node
  double P1 = 0.0;
  double P2 = 0.0;
  double psi_mean = 0.0;
  Eigen::VectorXd expected_emission;  // c_bar E[xi (1/alpha_k) growth(t_k,T)], k = 0..n
  std::vector<OracleIteration> trace;
  int iterations = 0;
  double residual = 0.0;
  bool damped_fallback = false;
};

/// Regression-free reference solution of the discretized fixed point for
/// n in {1, 2}. Conditional expectations are exact sums over the trailing
/// increments. Throws NumericalError if the residual does not reach `tol`
/// within `max_iter` iterations.
OracleResult oracle_solve(const ModelParams& params, const OracleOptions& options = {});

/// One application of the exact clearing map to `xi` (same node layout).
Eigen::VectorXd oracle_map(const ModelParams& params, const QuadratureGrid& grid,
                           const Eigen::VectorXd& xi);

}  // namespace mfg
