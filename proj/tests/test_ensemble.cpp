#include <cmath>
#include <filesystem>
#include <vector>

#include "doctest.h"

#include "mfg/ensemble.hpp"
#include "mfg/errors.hpp"
#include "mfg/parallel.hpp"
#include "mfg/stats.hpp"
#include "support.hpp"

using namespace mfg;

namespace {

bool identical(const PathEnsemble& a, const PathEnsemble& b) {
  return a.eps1 == b.eps1 && a.eps2 == b.eps2 && a.b1 == b.b1 && a.b2 == b.b2 &&
         a.log_e0t == b.log_e0t && a.log_ett == b.log_ett && a.inv_alpha == b.inv_alpha &&
         a.log_inv_alpha == b.log_inv_alpha && a.log_z == b.log_z;
}

void check_invariants(const PathEnsemble& e, const GridSpec& g) {
  const int n = e.steps();
  const double sqrt_h = std::sqrt(g.h);
  double worst_b = 0.0;
  double worst_consistency = 0.0;
  for (Index i = 0; i < e.paths(); ++i) {
    CHECK(e.b1(i, 0) == 0.0);
    CHECK(e.b2(i, 0) == 0.0);
    CHECK(e.log_e0t(i, 0) == 0.0);
    CHECK(e.log_ett(i, n) == 0.0);
    CHECK(e.inv_alpha(i, 0) == 1.0);
    double s1 = 0.0;
    double s2 = 0.0;
    for (int k = 1; k <= n; ++k) {
      s1 += e.eps1(i, k - 1);
      s2 += e.eps2(i, k - 1);
      worst_b = std::max(worst_b, std::abs(e.b1(i, k) - sqrt_h * s1));
      worst_b = std::max(worst_b, std::abs(e.b2(i, k) - sqrt_h * s2));
    }
    const double total = std::exp(e.log_e0t(i, n));
    for (int k = 0; k <= n; ++k) {
      const double prod = std::exp(e.log_e0t(i, k) + e.log_ett(i, k));
      worst_consistency = std::max(worst_consistency, std::abs(prod - total) / total);
    }
  }
  CHECK(worst_b < 1e-12);
  CHECK(worst_consistency < 1e-10);
}

}  // namespace

TEST_CASE("same seed gives a bitwise-identical ensemble") {
  const ModelParams p = test::small(3000, 6);
  const GridSpec g = make_grid(p.T, p.n);
  const auto a = simulate_paths(p, g);
  const auto b = simulate_paths(p, g);
  CHECK(identical(a, b));

  ModelParams q = p;
  q.seed = p.seed + 1;
  CHECK(simulate_paths(q, g).eps1 != a.eps1);
}

TEST_CASE("ensemble does not depend on the thread count") {
  const ModelParams p = test::small(10000, 4);
  const GridSpec g = make_grid(p.T, p.n);
  const int before = threads();
  set_threads(1);
  const auto a = simulate_paths(p, g);
  set_threads(3);
  const auto b = simulate_paths(p, g);
  set_threads(before);
  CHECK(identical(a, b));
}

TEST_CASE("path i is the same whatever N is") {
  ModelParams p = test::small(500, 3);
  const GridSpec g = make_grid(p.T, p.n);
  const auto a = simulate_paths(p, g);
  p.N = 9000;
  const auto b = simulate_paths(p, g);
  CHECK(a.eps1 == b.eps1.topRows(500));
  CHECK(a.eps2 == b.eps2.topRows(500));
}

TEST_CASE("ensemble invariants") {
  const ModelParams p = test::small(2000, 8);
  const GridSpec g = make_grid(p.T, p.n);
  check_invariants(simulate_paths(p, g), g);
}

TEST_CASE("single step is a scaled increment") {
  const ModelParams p = test::small(500, 1);
  const GridSpec g = make_grid(p.T, p.n);
  const auto e = simulate_paths(p, g);
  for (Index i = 0; i < e.paths(); ++i) {
    CHECK(e.b1(i, 1) == doctest::Approx(std::sqrt(p.T) * e.eps1(i, 0)).epsilon(1e-15));
    CHECK(e.b2(i, 1) == doctest::Approx(std::sqrt(p.T) * e.eps2(i, 0)).epsilon(1e-15));
  }
}

TEST_CASE("increment moments at desk scale") {
  const ModelParams p = test::small(20000, 5);
  const GridSpec g = make_grid(p.T, p.n);
  const auto e = simulate_paths(p, g);
  const double N = static_cast<double>(p.N);
  for (const Eigen::MatrixXd* m : {&e.eps1, &e.eps2}) {
    for (Index j = 0; j < m->cols(); ++j) {
      const double mean = m->col(j).mean();
      const double var = (m->col(j).array() - mean).square().sum() / (N - 1.0);
      CHECK(std::abs(mean) < 5.0 / std::sqrt(N));
      CHECK(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / N));
    }
  }
}

TEST_CASE("pooled increments pass a normality test") {
  const ModelParams p = test::small(20000, 5);
  const GridSpec g = make_grid(p.T, p.n);
  const auto e = simulate_paths(p, g);
  std::vector<double> pooled(e.eps1.data(), e.eps1.data() + e.eps1.size());
  REQUIRE(pooled.size() >= 100000);
  CHECK(stats::ks_normal(pooled) < stats::ks_critical_1pct(static_cast<double>(pooled.size())));
}

TEST_CASE("lognormal mean of the terminal growth factor") {
  ModelParams p;
  p.N = 50000;
  const GridSpec g = make_grid(p.T, p.n);
  const auto e = simulate_paths(p, g);
  const Eigen::VectorXd growth = e.log_e0t.col(p.n).array().exp();
  const auto m = stats::mean_se(growth);
  CHECK(std::abs(m.mean - std::exp(0.25)) < 3.0 * m.se);

  // Penalty factor and green density are unit-mean martingales.
  p.lambda = 0.4;
  const auto e2 = simulate_paths(p, g);
  const Eigen::VectorXd alpha = e2.log_inv_alpha.col(p.n).array().exp().inverse();
  const Eigen::VectorXd z = e2.log_z.array().exp();
  const auto ma = stats::mean_se(alpha);
  const auto mz = stats::mean_se(z);
  CHECK(std::abs(ma.mean - 1.0) < 3.0 * ma.se);
  CHECK(std::abs(mz.mean - 1.0) < 3.0 * mz.se);
}

TEST_CASE("antithetic extension") {
  ModelParams p = test::small(1000, 6);
  p.lambda = 0.4;
  const GridSpec g = make_grid(p.T, p.n);
  const auto base = simulate_paths(p, g);
  const auto ext = antithetic_extend(base, p, g);
  REQUIRE(ext.paths() == 2 * base.paths());
  CHECK(ext.antithetic);
  check_invariants(ext, g);

  const Index N = base.paths();
  for (int k = 0; k <= p.n; ++k) {
    double pair_sum = 0.0;
    for (Index i = 0; i < N; ++i) {
      CHECK(ext.b2(N + i, k) == -ext.b2(i, k));
      pair_sum += ext.b2(i, k) + ext.b2(N + i, k);
    }
    CHECK(pair_sum == 0.0);
  }
  CHECK(ext.eps1.topRows(N) == base.eps1);
}

TEST_CASE("antithetic mean of Z is closer to one in most seeds") {
  // Short horizon, where mirrored paths cancel most of the error in Z. At
  // lambda^2 T = 0.04 one seed improves with probability about 0.91, so
  // 8 of 10 fails with probability about 0.05.
  ModelParams p = test::small(2000, 1);
  p.T = 0.25;
  p.lambda = 0.4;
  const GridSpec g = make_grid(p.T, p.n);
  int closer = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    p.seed = 1000 + s;
    const auto base = simulate_paths(p, g);
    const auto ext = antithetic_extend(base, p, g);
    const double mb = base.log_z.array().exp().mean();
    const double me = ext.log_z.array().exp().mean();
    if (std::abs(me - 1.0) < std::abs(mb - 1.0)) ++closer;
  }
  CHECK(closer >= 8);
}

TEST_CASE("memory budget") {
  const ModelParams p = test::small(100000, 20);
  const GridSpec g = make_grid(p.T, p.n);
  SimulationOptions o;
  o.memory_budget_bytes = 1 << 20;
  try {
    simulate_paths(p, g, o);
    FAIL("expected ResourceError");
  } catch (const ResourceError& e) {
    CHECK(e.required_bytes() == ensemble_bytes(100000, 20));
    CHECK(e.required_bytes() > o.memory_budget_bytes);
  }
}

TEST_CASE("dump and reload") {
  const ModelParams p = test::small(700, 4);
  const GridSpec g = make_grid(p.T, p.n);
  const auto e = simulate_paths(p, g);
  const auto file = std::filesystem::temp_directory_path() / "mfg_test_ensemble.bin";
  dump_ensemble(e, p, file);

  const auto h = read_ensemble_header(file);
  CHECK(h.seed == p.seed);
  CHECK(h.paths == 700);
  CHECK(h.steps == 4);
  CHECK(h.params_hash == params_hash(p));
  CHECK_FALSE(h.antithetic);
  CHECK(h.T == p.T);

  const auto back = load_ensemble(file, p, g);
  CHECK(identical(e, back));

  ModelParams other = p;
  other.n = 5;
  CHECK_THROWS_AS(load_ensemble(file, other, make_grid(other.T, other.n)), UsageError);
  other = p;
  other.N = 701;
  CHECK_THROWS_AS(load_ensemble(file, other, g), UsageError);
  std::filesystem::remove(file);
}
