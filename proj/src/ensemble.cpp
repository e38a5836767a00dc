#include "mfg/ensemble.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <random>

#include "mfg/errors.hpp"
#include "mfg/parallel.hpp"

namespace mfg {

std::uint64_t ensemble_bytes(Index N, int n) {
  // 2 increment matrices, 6 node matrices, log Z.
  const auto paths = static_cast<std::uint64_t>(N);
  const auto steps = static_cast<std::uint64_t>(n);
  return paths * (2 * steps + 6 * (steps + 1) + 1) * sizeof(double);
}

namespace {

std::mt19937_64 path_engine(std::uint64_t seed, Index path) {
  const auto i = static_cast<std::uint64_t>(path);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
  return std::mt19937_64(seq);
}

void check_grid(const ModelParams& params, const GridSpec& grid) {
  if (grid.n != params.n) throw UsageError("grid step count differs from params.n");
}

}  // namespace

PathEnsemble simulate_paths(const ModelParams& params, const GridSpec& grid,
                            const SimulationOptions& options) {
  validate(params);
  check_grid(params, grid);
  const Index N = params.N;
  const int n = params.n;
  const std::uint64_t bytes = ensemble_bytes(N, n);
  if (bytes > options.memory_budget_bytes) throw ResourceError(bytes, options.memory_budget_bytes);

  PathEnsemble e;
  e.seed = params.seed;
  e.T = params.T;
  e.eps1.resize(N, n);
  e.eps2.resize(N, n);
  parallel_for(N, [&](Index i) {
    auto engine = path_engine(params.seed, i);
    std::normal_distribution<double> normal;
    for (int j = 0; j < n; ++j) {
      e.eps1(i, j) = normal(engine);
      e.eps2(i, j) = normal(engine);
    }
  });
  derive_factors(e, params, grid);
  return e;
}

void derive_factors(PathEnsemble& e, const ModelParams& params, const GridSpec& grid) {
  check_grid(params, grid);
  const Index N = e.paths();
  const int n = e.steps();
  if (n != grid.n) throw UsageError("ensemble step count differs from grid");
  const double sqrt_h = std::sqrt(grid.h);
  e.T = params.T;

  e.b1.resize(N, n + 1);
  e.b2.resize(N, n + 1);
  e.b1.col(0).setZero();
  e.b2.col(0).setZero();
  for (int k = 1; k <= n; ++k) {
    e.b1.col(k) = e.b1.col(k - 1) + sqrt_h * e.eps1.col(k - 1);
    e.b2.col(k) = e.b2.col(k - 1) + sqrt_h * e.eps2.col(k - 1);
  }

  e.log_e0t.resize(N, n + 1);
  e.log_ett.resize(N, n + 1);
  e.log_inv_alpha.resize(N, n + 1);
  for (int k = 0; k <= n; ++k) {
    e.log_e0t.col(k).array() = log_growth_factor(params, grid.t(k), e.b1.col(k).array());
    e.log_inv_alpha.col(k).array() =
        log_penalty_inverse_factor(params, grid.t(k), e.b2.col(k).array());
  }
  e.log_e0t.col(0).setZero();
  for (int k = 0; k <= n; ++k) e.log_ett.col(k) = e.log_e0t.col(n) - e.log_e0t.col(k);
  e.inv_alpha = e.log_inv_alpha.array().exp().matrix();
  e.log_z = green_density_logZ(params, e.b2.col(n).array()).matrix();
}

PathEnsemble antithetic_extend(const PathEnsemble& base, const ModelParams& params,
                               const GridSpec& grid) {
  const Index N = base.paths();
  PathEnsemble e;
  e.seed = base.seed;
  e.antithetic = true;
  e.eps1.resize(2 * N, base.steps());
  e.eps2.resize(2 * N, base.steps());
  e.eps1.topRows(N) = base.eps1;
  e.eps1.bottomRows(N) = -base.eps1;
  e.eps2.topRows(N) = base.eps2;
  e.eps2.bottomRows(N) = -base.eps2;
  derive_factors(e, params, grid);
  return e;
}

namespace {

constexpr std::array<char, 8> kMagic{'M', 'F', 'G', 'E', 'N', 'S', '0', '1'};

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw UsageError("ensemble file truncated");
  return v;
}

EnsembleHeader read_header(std::ifstream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw UsageError("not an ensemble dump (bad magic)");
  EnsembleHeader h;
  h.seed = get<std::uint64_t>(in);
  h.paths = get<std::uint64_t>(in);
  h.steps = get<std::uint64_t>(in);
  h.params_hash = get<std::uint64_t>(in);
  h.antithetic = get<std::uint8_t>(in) != 0;
  h.T = get<double>(in);
  return h;
}

}  // namespace

void dump_ensemble(const PathEnsemble& e, const ModelParams& params,
                   const std::filesystem::path& file) {
  static_assert(std::endian::native == std::endian::little, "dump format is little-endian");
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot open " + file.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put(out, e.seed);
  put(out, static_cast<std::uint64_t>(e.paths()));
  put(out, static_cast<std::uint64_t>(e.steps()));
  put(out, params_hash(params));
  put(out, static_cast<std::uint8_t>(e.antithetic ? 1 : 0));
  put(out, e.T);
  const auto bytes = static_cast<std::streamsize>(e.eps1.size() * sizeof(double));
  out.write(reinterpret_cast<const char*>(e.eps1.data()), bytes);
  out.write(reinterpret_cast<const char*>(e.eps2.data()), bytes);
  if (!out) throw UsageError("failed writing " + file.string());
}

EnsembleHeader read_ensemble_header(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw UsageError("cannot open " + file.string());
  return read_header(in);
}

PathEnsemble load_ensemble(const std::filesystem::path& file, const ModelParams& params,
                           const GridSpec& grid) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw UsageError("cannot open " + file.string());
  const EnsembleHeader h = read_header(in);
  if (h.steps != static_cast<std::uint64_t>(params.n) || h.T != params.T) {
    throw UsageError("ensemble dump grid (n, T) does not match params");
  }
  const auto expected_paths = static_cast<std::uint64_t>(params.N) * (h.antithetic ? 2 : 1);
  if (h.paths != expected_paths) throw UsageError("ensemble dump path count does not match params");
  PathEnsemble e;
  e.seed = h.seed;
  e.antithetic = h.antithetic;
  e.eps1.resize(static_cast<Index>(h.paths), static_cast<Index>(h.steps));
  e.eps2.resizeLike(e.eps1);
  const auto bytes = static_cast<std::streamsize>(e.eps1.size() * sizeof(double));
  in.read(reinterpret_cast<char*>(e.eps1.data()), bytes);
  in.read(reinterpret_cast<char*>(e.eps2.data()), bytes);
  if (!in) throw UsageError("ensemble file truncated");
  derive_factors(e, params, grid);
  return e;
}

}  // namespace mfg
