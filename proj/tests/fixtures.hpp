#pragma once

#include "smsvm/linesearch.hpp"

#include <random>

namespace fixtures {

/// Random well-posed line-search problems. Every fourth instance has mu = 0;
/// the others mix zero entries in w and d and, every third, duplicated
/// breakpoints.
inline smsvm::LineSearchProblem random_line_problem(std::mt19937_64& rng, int k) {
  using smsvm::Index;
  std::uniform_int_distribution<Index> dim(1, 64);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const Index m = dim(rng);
  smsvm::LineSearchProblem p;
  p.w.resize(m);
  p.d.resize(m);
  for (Index i = 0; i < m; ++i) {
    p.w[i] = unit(rng) < 0.2 ? 0.0 : normal(rng);
    p.d[i] = unit(rng) < 0.15 ? 0.0 : normal(rng);
  }
  if (k % 3 == 0 && m >= 2) {
    // Copy a crossing so that two coordinates share sigma exactly.
    p.w[1] = 2.0 * p.w[0];
    p.d[1] = 2.0 * p.d[0];
  }
  if ((p.d.array() == 0.0).all()) p.d[0] = 1.0;
  p.a = 0.05 + 2.0 * unit(rng);
  p.b = 3.0 * normal(rng);
  p.mu = k % 4 == 0 ? 0.0 : 1.5 * unit(rng);
  return p;
}

}  // namespace fixtures
