#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"

#include "mfg/analytics.hpp"
#include "mfg/config.hpp"
#include "mfg/oracle.hpp"
#include "mfg/solver.hpp"
#include "mfg/stats.hpp"

namespace mfg {

inline constexpr const char* kVersion = "1.0.0";

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // overrides config.out_dir
  std::optional<std::uint64_t> seed;             // overrides config.model.seed
  bool write_files = true;
};

struct RepetitionResult {
  std::uint64_t seed = 0;
  PriceDecomposition prices;
  double psi_mean = 0.0;
};

/// One sweep point: all repetitions, plus the full solution of the first.
struct PointResult {
  ModelParams params;
  std::vector<RepetitionResult> reps;
  PriceDecomposition combined;  // across repetitions
  stats::MeanSe psi_mean;       // across repetitions
  SolveResult solution;
  EmissionDistribution emissions;
  EmissionCurve curve;
  std::optional<OracleResult> oracle;
};

/// Cartesian product of the sweep lists, gamma_pen outermost, rho innermost.
std::vector<ModelParams> sweep_points(const RunConfig& config);

/// Seed of repetition `rep` at sweep point `point`.
std::uint64_t repetition_seed(const RunConfig& config, std::uint64_t base_seed, std::size_t point,
                              int rep);

/// Simulate, solve and analyse every repetition of one parameter point.
PointResult run_point(const RunConfig& config, const ModelParams& params, std::size_t point_index,
                      std::uint64_t base_seed);

/// Full run: every sweep point x repetition. Writes report.json and, per
/// point, trace.csv, emissions.csv, curve.csv and prices.csv. CSVs go to
/// out_dir directly for a single point, otherwise to out_dir/point_<j>/.
nlohmann::json run(const RunConfig& config, const RunOptions& options = {},
                   std::vector<PointResult>* points = nullptr);

struct TableEntry {
  TableRow row;
  PriceDecomposition prices;
  stats::MeanSe psi_mean;
};

/// Price-table rows x repetitions; writes table.csv with columns
/// gamma,lambda,rho,P1,P1_se,P2,P2_se in row order.
std::vector<TableEntry> reproduce_table(const RunConfig& config, const RunOptions& options = {});

/// Quadrature reference solution for the config's parameters with `n` steps.
/// Writes the same report layout flagged "oracle": true.
nlohmann::json run_oracle(const RunConfig& config, int n, const RunOptions& options = {},
                          OracleResult* result = nullptr);

/// Report fragments, exposed for tests.
std::string trace_csv(const PotentialTrace& trace);
std::string emissions_csv(const EmissionDistribution& emissions);
std::string curve_csv(const EmissionCurve& curve);
std::string prices_csv(const std::vector<RepetitionResult>& reps);
std::string table_csv(const std::vector<TableEntry>& entries);

}  // namespace mfg
