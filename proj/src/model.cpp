#include "mfg/model.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "mfg/errors.hpp"

namespace mfg {

Aggregates derive_aggregates(const InvestorParams& inv) {
  if (!(inv.gamma_r > 0.0)) throw ParameterError("gamma_r", "risk aversion must be > 0");
  if (!(inv.gamma_g > 0.0)) throw ParameterError("gamma_g", "risk aversion must be > 0");
  const double gamma_star = 1.0 / (1.0 / inv.gamma_r + 1.0 / inv.gamma_g);
  const double rho = inv.gamma_r / (inv.gamma_r + inv.gamma_g);
  return {gamma_star, rho};
}

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ParameterError(field, what);
}

}  // namespace

void validate(const ModelParams& p) {
  require(std::isfinite(p.T) && p.T > 0.0, "T", "must be > 0");
  require(std::isfinite(p.gamma_star) && p.gamma_star > 0.0, "gamma_star", "must be > 0");
  require(p.rho >= 0.0 && p.rho <= 1.0, "rho", "must lie in [0, 1]");
  require(std::isfinite(p.lambda), "lambda", "must be finite");
  require(std::isfinite(p.gamma_pen) && p.gamma_pen >= 0.0, "gamma_pen", "must be >= 0");
  require(std::isfinite(p.sigma0) && p.sigma0 >= 0.0, "sigma0", "must be >= 0");
  require(std::isfinite(p.mu), "mu", "must be finite");
  require(std::isfinite(p.v_bar) && p.v_bar > 0.0, "v_bar", "must be > 0");
  require(std::isfinite(p.c_bar) && p.c_bar > 0.0, "c_bar", "must be > 0");
  require(std::isfinite(p.c2_bar) && p.c2_bar > 0.0, "c2_bar", "must be > 0");
  require(p.c2_bar >= p.c_bar * p.c_bar * (1.0 - 1e-12), "c2_bar", "must be >= c_bar^2");
  require(std::isfinite(p.sigma_idio) && p.sigma_idio >= 0.0, "sigma_idio", "must be >= 0");
  require(p.n >= 1, "n", "must be >= 1");
  require(p.N >= 2, "N", "must be >= 2");
  require(p.p >= 2, "p", "must be >= 2");
  require(p.n_iter >= 1, "n_iter", "must be >= 1");
}

namespace {

// FNV-1a over the raw bytes of each field, in declaration order.
struct Fnv1a {
  std::uint64_t state = 0xcbf29ce484222325ULL;
  void bytes(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      state ^= (v >> (8 * i)) & 0xffU;
      state *= 0x100000001b3ULL;
    }
  }
  void real(double x) { bytes(std::bit_cast<std::uint64_t>(x)); }
  void integer(std::int64_t x) { bytes(static_cast<std::uint64_t>(x)); }
};

}  // namespace

std::uint64_t params_hash(const ModelParams& p) {
  Fnv1a h;
  for (double x : {p.T, p.gamma_star, p.rho, p.lambda, p.gamma_pen, p.sigma0, p.mu, p.v_bar,
                   p.c_bar, p.c2_bar, p.sigma_idio}) {
    h.real(x);
  }
  h.integer(p.n);
  h.integer(p.N);
  h.integer(p.p);
  h.integer(p.n_iter);
  h.bytes(p.seed);
  return h.state;
}

GridSpec make_grid(double T, int n) {
  if (!(T > 0.0)) throw ParameterError("T", "must be > 0");
  if (n < 1) throw ParameterError("n", "must be >= 1");
  GridSpec g;
  g.n = n;
  g.h = T / n;
  g.t.resize(n + 1);
  g.w.setOnes(n + 1);
  for (int k = 0; k <= n; ++k) g.t(k) = k * g.h;
  g.t(n) = T;
  g.w(0) = 0.5;
  g.w(n) = 0.5;
  return g;
}

}  // namespace mfg
