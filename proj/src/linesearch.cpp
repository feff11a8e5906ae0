#include "smsvm/linesearch.hpp"

#include <algorithm>
#include <cmath>

namespace smsvm {

double LineSearchProblem::value(double s) const {
  return a * s * s + b * s + mu * (w + s * d).lpNorm<1>();
}

double LineSearchProblem::upper_bound() const {
  if (s_max) return *s_max;
  if (a > 0.0) return (std::abs(b) + mu * d.lpNorm<1>()) / (2.0 * a);
  return std::numeric_limits<double>::infinity();
}

std::vector<Breakpoint> breakpoints(const Vector& w, const Vector& d) {
  if (w.size() != d.size()) throw std::invalid_argument("w and d differ in length");
  std::vector<Breakpoint> out;
  for (Index i = 0; i < d.size(); ++i) {
    if (d[i] == 0.0) continue;
    const double sigma = -w[i] / d[i];
    if (sigma > 0.0) out.push_back({sigma, i});
  }
  std::sort(out.begin(), out.end(), [](const Breakpoint& x, const Breakpoint& y) {
    return x.sigma < y.sigma || (x.sigma == y.sigma && x.index < y.index);
  });
  return out;
}

double slope_at(const LineSearchProblem& p, double s, Side side) {
  // sign(w_i + s d_i) d_i is +|d_i| past the crossing and -|d_i| before it.
  double l1 = 0.0;
  for (Index i = 0; i < p.d.size(); ++i) {
    const double di = p.d[i];
    if (di == 0.0) continue;
    const double sigma = -p.w[i] / di;
    if (s > sigma) {
      l1 += std::abs(di);
    } else if (s < sigma) {
      l1 -= std::abs(di);
    } else {
      l1 += side == Side::right ? std::abs(di) : -std::abs(di);
    }
  }
  return 2.0 * p.a * s + p.b + p.mu * l1;
}

namespace {

void check_problem(const LineSearchProblem& p) {
  if (p.w.size() != p.d.size()) throw std::invalid_argument("w and d differ in length");
  if (!(p.a >= 0.0) || !std::isfinite(p.a)) throw std::invalid_argument("a must be finite and >= 0");
  if (!(p.mu >= 0.0) || !std::isfinite(p.mu)) throw std::invalid_argument("mu must be finite and >= 0");
  if (!std::isfinite(p.b)) throw std::invalid_argument("b must be finite");
  if (!p.w.allFinite() || !p.d.allFinite()) throw std::invalid_argument("w and d must be finite");
  if ((p.d.array() == 0.0).all()) throw std::invalid_argument("direction d must be nonzero");
  if (!(p.a > 0.0) && !(p.mu * p.d.lpNorm<1>() > -p.b)) {
    throw std::invalid_argument("line search needs a > 0 or mu ||d||_1 > -b");
  }
  if (p.s_max && !(*p.s_max >= 0.0)) throw std::invalid_argument("s_max must be >= 0");
}

LineSearchResult finish(const LineSearchProblem& p, double s, std::optional<Index> zero,
                        int probes) {
  return {s, zero, slope_at(p, s, Side::left), slope_at(p, s, Side::right), probes};
}

}  // namespace

LineSearchResult minimize_quadratic_l1(const LineSearchProblem& p) {
  check_problem(p);
  const double s_max = p.upper_bound();

  if (p.mu == 0.0) {
    // Smooth quadratic; a > 0 is implied by the preconditions unless b > 0.
    double s = p.a > 0.0 ? -p.b / (2.0 * p.a) : 0.0;
    s = std::clamp(s, 0.0, s_max);
    return finish(p, s, std::nullopt, 0);
  }

  double s1 = 0.0;
  double slope1 = slope_at(p, 0.0, Side::right);
  if (slope1 >= 0.0) return finish(p, 0.0, std::nullopt, 0);

  // Distinct breakpoint values inside (0, s_max); duplicates share one probe.
  std::vector<Breakpoint> all = breakpoints(p.w, p.d);
  std::vector<Breakpoint> groups;
  std::optional<Index> at_s_max;
  for (const auto& bp : all) {
    if (bp.sigma > s_max) break;
    if (bp.sigma == s_max) {
      if (!at_s_max) at_s_max = bp.index;
      continue;
    }
    if (groups.empty() || groups.back().sigma != bp.sigma) groups.push_back(bp);
  }

  double s2 = s_max;
  double slope2 = 0.0;
  if (std::isfinite(s_max)) {
    slope2 = slope_at(p, s_max, Side::left);
    if (slope2 <= 0.0) return finish(p, s_max, at_s_max, 0);
  } else {
    slope2 = p.b + p.mu * p.d.lpNorm<1>();
    if (slope2 < 0.0) {
      throw UnboundedLineSearch("line search objective is unbounded below (a = 0)");
    }
  }

  int probes = 0;
  std::ptrdiff_t lo = -1;
  auto hi = static_cast<std::ptrdiff_t>(groups.size());
  while (hi > lo + 1) {
    const std::ptrdiff_t mid = lo + (hi - lo) / 2;
    const Breakpoint& bp = groups[static_cast<std::size_t>(mid)];
    const double s = bp.sigma;
    const double left = slope_at(p, s, Side::left);
    const double right = slope_at(p, s, Side::right);
    ++probes;
    if (left == 0.0 || right == 0.0 || (left < 0.0 && right > 0.0)) {
      return {s, bp.index, left, right, probes};
    }
    if (right < 0.0) {
      lo = mid;
      s1 = s;
      slope1 = right;
    } else {
      hi = mid;
      s2 = s;
      slope2 = left;
    }
  }

  // j' is affine with slope 2a on (s1, s2).
  double s;
  if (std::isfinite(s2)) {
    s = (s1 * slope2 - s2 * slope1) / (slope2 - slope1);
  } else {
    s = s1 - slope1 / (2.0 * p.a);
  }
  s = std::clamp(s, s1, std::min(s2, s_max));
  return finish(p, s, std::nullopt, probes);
}

}  // namespace smsvm
