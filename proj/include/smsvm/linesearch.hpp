#pragma once

#include "smsvm/core.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace smsvm {

/// j(s) = a s^2 + b s + mu ||w + s d||_1 restricted to 0 <= s <= s_max.
///
/// Requires a >= 0, mu >= 0, d != 0, and either a > 0 or mu ||d||_1 > -b.
/// When s_max is left unset it defaults to (|b| + mu ||d||_1) / (2a), which
/// brackets every minimizer; with a = 0 the interval is unbounded.
struct LineSearchProblem {
  Vector w;
  Vector d;
  double b = 0.0;
  double a = 0.0;
  double mu = 0.0;
  std::optional<double> s_max;

  double value(double s) const;
  double upper_bound() const;
};

struct LineSearchResult {
  double s_star = 0.0;
  /// Set when s_star is the breakpoint -w_j/d_j (bitwise as computed), so the
  /// caller may write w_j + s_star d_j as an exact zero.
  std::optional<Index> zero_index;
  double slope_left = 0.0;
  double slope_right = 0.0;
  int probes = 0;
};

/// a = 0 and j'(s) < 0 beyond the last breakpoint: j is unbounded below.
class UnboundedLineSearch : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct Breakpoint {
  double sigma;
  Index index;
};

/// Positive zero crossings sigma_i = -w_i/d_i (d_i != 0), ascending. Equal
/// values are kept as separate entries, ordered by index.
std::vector<Breakpoint> breakpoints(const Vector& w, const Vector& d);

enum class Side { left, right };

/// One-sided derivative j'(s-) or j'(s+). A coordinate counts as crossing at s
/// exactly when -w_i/d_i == s, so the result agrees with breakpoints().
double slope_at(const LineSearchProblem& problem, double s, Side side);

/// Global minimizer of j over [0, s_max] by binary search over the sorted
/// breakpoints followed by an affine root on the bracketing segment.
LineSearchResult minimize_quadratic_l1(const LineSearchProblem& problem);

}  // namespace smsvm
