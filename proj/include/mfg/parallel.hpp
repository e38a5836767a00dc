#pragma once

#include <algorithm>
#include <vector>

#include <omp.h>

#include "mfg/model.hpp"

namespace mfg {

// Paths are processed in fixed-size blocks. Reductions sum each block on its
// own and then combine the block partials in index order, so results do not
// depend on how many threads ran the blocks.
inline constexpr Index kBlockSize = 4096;

inline void set_threads(int threads) { omp_set_num_threads(std::max(threads, 1)); }
inline int threads() { return omp_get_max_threads(); }

inline Index block_count(Index n) { return (n + kBlockSize - 1) / kBlockSize; }

/// Calls body(i) for every i in [0, n), blocks distributed across threads.
template <typename Body>
void parallel_for(Index n, Body&& body) {
  const Index blocks = block_count(n);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const Index end = std::min(n, (b + 1) * kBlockSize);
    for (Index i = b * kBlockSize; i < end; ++i) body(i);
  }
}

/// Deterministic sum of term(i) over [0, n).
template <typename Term>
double blocked_sum(Index n, Term&& term) {
  const Index blocks = block_count(n);
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const Index end = std::min(n, (b + 1) * kBlockSize);
    double s = 0.0;
    for (Index i = b * kBlockSize; i < end; ++i) s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

template <typename Term>
double blocked_mean(Index n, Term&& term) {
  return blocked_sum(n, std::forward<Term>(term)) / static_cast<double>(n);
}

}  // namespace mfg
