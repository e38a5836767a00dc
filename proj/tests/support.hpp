#pragma once

#include <cmath>

#include "mfg/model.hpp"

namespace mfg::test {

// Table parameters with both noises switched off: every factor is a
// deterministic function of time.
inline ModelParams deterministic(Index N = 1000, int n = 20) {
  ModelParams p;
  p.gamma_pen = 0.0;
  p.lambda = 0.0;
  p.sigma0 = 0.0;
  p.N = N;
  p.n = n;
  return p;
}

inline ModelParams small(Index N = 4000, int n = 5) {
  ModelParams p;
  p.N = N;
  p.n = n;
  return p;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace mfg::test
