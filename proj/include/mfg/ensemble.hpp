#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Core>

#include "mfg/model.hpp"

namespace mfg {

/// Simulated common-noise scenarios on the time grid.
///
/// Increment matrices are N x n (column j-1 holds step j). Every other matrix
/// is N x (n + 1), one column per grid node t_k. Columns are contiguous, which
/// is the access pattern of the per-node regression and quadrature loops.
struct PathEnsemble {
  std::uint64_t seed = 0;
  bool antithetic = false;
  double T = 0.0;

  Eigen::MatrixXd eps1;           // standard normal increments, growth factor
  Eigen::MatrixXd eps2;           // standard normal increments, penalty / green tilt
  Eigen::MatrixXd b1;             // B^{0,1} at nodes, b1(i, 0) = 0
  Eigen::MatrixXd b2;             // B^{0,2} at nodes
  Eigen::MatrixXd log_e0t;        // ln growth factor from 0 to t_k
  Eigen::MatrixXd log_ett;        // ln growth factor from t_k to T
  Eigen::MatrixXd log_inv_alpha;  // ln (1 / alpha_{t_k})
  Eigen::MatrixXd inv_alpha;      // 1 / alpha_{t_k}
  Eigen::VectorXd log_z;          // ln Z, green-investor density

  Index paths() const { return eps1.rows(); }
  int steps() const { return static_cast<int>(eps1.cols()); }
};

struct SimulationOptions {
  std::uint64_t memory_budget_bytes = std::uint64_t{8} << 30;
};

/// Bytes held by an ensemble of N paths and n steps.
std::uint64_t ensemble_bytes(Index N, int n);

/// Draws N x n pairs of standard normal increments and fills every derived
/// factor. Path i draws from its own generator seeded by (seed, i), so the
/// ensemble is identical for any thread count or fill order.
PathEnsemble simulate_paths(const ModelParams& params, const GridSpec& grid,
                            const SimulationOptions& options = {});

/// Recomputes Brownian values and all factors from the stored increments.
void derive_factors(PathEnsemble& ensemble, const ModelParams& params, const GridSpec& grid);

/// Appends the mirrored scenarios: path N + i carries the negated increments
/// of path i.
PathEnsemble antithetic_extend(const PathEnsemble& ensemble, const ModelParams& params,
                               const GridSpec& grid);

struct EnsembleHeader {
  std::uint64_t seed = 0;
  std::uint64_t paths = 0;
  std::uint64_t steps = 0;
  std::uint64_t params_hash = 0;
  bool antithetic = false;
  double T = 0.0;
};

/// Binary dump: magic "MFGENS01", header, then eps1 and eps2 column-major as
/// little-endian doubles.
void dump_ensemble(const PathEnsemble& ensemble, const ModelParams& params,
                   const std::filesystem::path& file);
EnsembleHeader read_ensemble_header(const std::filesystem::path& file);

/// Loads increments and recomputes factors from `params`. Throws UsageError
/// if the dump's (N, n, T) does not match.
PathEnsemble load_ensemble(const std::filesystem::path& file, const ModelParams& params,
                           const GridSpec& grid);

}  // namespace mfg
