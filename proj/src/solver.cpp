#include "smsvm/solver.hpp"

#include "smsvm/linesearch.hpp"
#include "smsvm/loss.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace smsvm {

namespace {

// Newton system restricted to the active coordinates. When there are more
// active coordinates than samples (wide data) the Hessian
//   H = lambda (I + B^T B),  B = diag(sqrt(j''(u_i) / (n lambda))) X_A
// is solved through the n x n matrix I + B B^T instead of the k x k block.
class ActiveSystem {
 public:
  ActiveSystem(const Dataset& data, const Vector& w, double lambda, double eps,
               const std::vector<Index>& active, SolveReport& report)
      : lambda_(lambda) {
    const auto k = static_cast<Index>(active.size());
    low_rank_ = lambda > 0.0 && k > data.n();
    if (!low_rank_) {
      h_ = hessian_active(data, w, lambda, eps, active, &report);
      factor();
      return;
    }
    std::vector<Index> position(static_cast<std::size_t>(data.m()), -1);
    for (Index a = 0; a < k; ++a) position[static_cast<std::size_t>(active[static_cast<std::size_t>(a)])] = a;
    const Vector u = margins(data, w);
    const double scale = 1.0 / (static_cast<double>(data.n()) * lambda);
    b_ = Matrix::Zero(data.n(), k);
    for (Index i = 0; i < data.n(); ++i) {
      const double root = std::sqrt(smoothed_hinge_d2(u[i], eps) * scale);
      for (SparseRowMatrix::InnerIterator it(data.features(), i); it; ++it) {
        const Index p = position[static_cast<std::size_t>(it.col())];
        if (p >= 0) b_(i, p) = root * it.value();
      }
    }
    count_data_pass(report, PassKind::hessian);
    factor();
  }

  Vector solve(const Vector& rhs) const {
    if (!low_rank_) return llt_.solve(rhs);
    const Vector br = b_ * rhs;
    return (rhs - b_.transpose() * llt_.solve(br)) / lambda_;
  }

  double quad(const Vector& x) const {
    if (!low_rank_) return x.dot(h_ * x);
    return lambda_ * (x.squaredNorm() + (b_ * x).squaredNorm());
  }

  void drop(Index pos) {
    if (!low_rank_) {
      const Index k = h_.rows();
      Matrix reduced(k - 1, k - 1);
      for (Index r = 0, rr = 0; r < k; ++r) {
        if (r == pos) continue;
        for (Index c = 0, cc = 0; c < k; ++c) {
          if (c == pos) continue;
          reduced(rr, cc++) = h_(r, c);
        }
        ++rr;
      }
      h_ = std::move(reduced);
    } else {
      const Index k = b_.cols();
      Matrix reduced(b_.rows(), k - 1);
      reduced.leftCols(pos) = b_.leftCols(pos);
      reduced.rightCols(k - 1 - pos) = b_.rightCols(k - 1 - pos);
      b_ = std::move(reduced);
    }
    factor();
  }

 private:
  void factor() {
    if (!low_rank_) {
      llt_.compute(h_);
    } else {
      Matrix m = b_ * b_.transpose();
      m.diagonal().array() += 1.0;
      llt_.compute(m);
    }
    if (llt_.info() != Eigen::Success) {
      throw NumericalError("Cholesky factorization of the active Hessian failed (lambda = 0?)");
    }
  }

  double lambda_;
  bool low_rank_ = false;
  Matrix h_;
  Matrix b_;
  Eigen::LLT<Matrix> llt_;
};

// g + mu sign(w) on the support; the minimum-norm subgradient element
// sign(g_i) (|g_i| - mu)_+ at zeros.
Vector composite_gradient(const Vector& g, const Vector& w, double mu) {
  Vector gt(g.size());
  for (Index i = 0; i < g.size(); ++i) {
    if (w[i] != 0.0) {
      gt[i] = g[i] + mu * sign(w[i]);
    } else {
      gt[i] = sign(g[i]) * std::max(std::abs(g[i]) - mu, 0.0);
    }
  }
  return gt;
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw NumericalError(std::string("non-finite ") + what);
}

}  // namespace

std::vector<Index> activation_scan(const Vector& g, const std::vector<bool>& inactive, double mu) {
  std::vector<Index> out;
  for (Index i = 0; i < g.size(); ++i) {
    if (inactive[static_cast<std::size_t>(i)] && std::abs(g[i]) > mu) out.push_back(i);
  }
  return out;
}

SolverState initial_state(const Dataset& data, const HyperParams& params,
                          const std::optional<Vector>& w0, SolveReport& report) {
  SolverState state;
  state.w = w0 ? *w0 : Vector::Zero(data.m());
  if (state.w.size() != data.m()) throw std::invalid_argument("initial weights have the wrong dimension");
  state.eps = params.eps0;
  state.inactive.resize(static_cast<std::size_t>(data.m()));
  for (Index i = 0; i < data.m(); ++i) state.inactive[static_cast<std::size_t>(i)] = state.w[i] == 0.0;
  const Vector g = gradient_smooth(data, state.w, params.lambda, state.eps, &report);
  require_finite(g, "gradient");
  state.candidates = activation_scan(g, state.inactive, params.mu);
  for (Index j : state.candidates) state.inactive[static_cast<std::size_t>(j)] = false;
  return state;
}

StepInfo newton_step(const Dataset& data, SolverState& state, const HyperParams& params,
                     SolveReport& report, const NewtonTolerance& tol) {
  StepInfo info;
  NewtonWork& work = info.work;
  work.g = gradient_smooth(data, state.w, params.lambda, state.eps, &report);
  require_finite(work.g, "gradient");
  work.g_tilde = composite_gradient(work.g, state.w, params.mu);
  work.d = Vector::Zero(data.m());
  for (Index i = 0; i < data.m(); ++i) {
    if (!state.inactive[static_cast<std::size_t>(i)]) work.active.push_back(i);
  }
  for (Index i : work.active) info.active_kkt = std::max(info.active_kkt, std::abs(work.g_tilde[i]));
  if (work.active.empty()) return info;

  const double decrement_tol = tol.decrement.value_or(state.eps / params.newton_tol_factor);
  auto penalized = [&](const Vector& w) {
    return objective_penalized(data, w, params, state.eps, &report);
  };

  ActiveSystem system(data, state.w, params.lambda, state.eps, work.active, report);
  LineSearchResult ls;
  for (;;) {
    const auto k = static_cast<Index>(work.active.size());
    Vector gt_active(k);
    for (Index a = 0; a < k; ++a) gt_active[a] = work.g_tilde[work.active[static_cast<std::size_t>(a)]];
    const Vector d_active = -system.solve(gt_active);
    require_finite(d_active, "Newton direction");
    info.decrement = d_active.dot(gt_active);
    work.d.setZero();
    for (Index a = 0; a < k; ++a) work.d[work.active[static_cast<std::size_t>(a)]] = d_active[a];

    if (std::abs(info.decrement) < decrement_tol) {
      bool done = !tol.active_kkt || info.active_kkt <= *tol.active_kkt;
      if (!done) {
        // Nothing measurable is left to gain in floating point.
        if (!state.objective) state.objective = penalized(state.w);
        done = std::abs(info.decrement) <=
               8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(*state.objective));
      }
      if (done) return info;
    }
    if (!(info.decrement < 0.0)) {
      throw NumericalError("Newton direction is not a descent direction");
    }

    LineSearchProblem problem{state.w, work.d, work.g.dot(work.d), 0.5 * system.quad(d_active),
                              params.mu, std::nullopt};
    ls = minimize_quadratic_l1(problem);
    if (ls.s_star > 0.0) break;

    // A zero step means some activated zero coordinates move against their
    // subgradient sign; freeze all of them and resolve.
    std::vector<std::size_t> wrong;
    for (std::size_t a = 0; a < work.active.size(); ++a) {
      const Index i = work.active[a];
      if (state.w[i] != 0.0 || work.d[i] == 0.0) continue;
      const double extra = work.g[i] * work.d[i] + params.mu * std::abs(work.d[i]) -
                           work.g_tilde[i] * work.d[i];
      if (extra > 0.0) wrong.push_back(a);
    }
    if (wrong.empty()) throw NumericalError("exact line search returned a zero step on a descent direction");
    for (auto it = wrong.rbegin(); it != wrong.rend(); ++it) {
      const Index j = work.active[*it];
      state.inactive[static_cast<std::size_t>(j)] = true;
      info.deactivated.push_back(j);
      work.active.erase(work.active.begin() + static_cast<std::ptrdiff_t>(*it));
    }
    if (work.active.empty()) {
      work.d.setZero();
      info.decrement = 0.0;
      return info;
    }
    system = ActiveSystem(data, state.w, params.lambda, state.eps, work.active, report);
  }

  if (!state.objective) state.objective = penalized(state.w);
  const double f0 = *state.objective;
  double s = ls.s_star;
  for (int halving = 0; halving <= params.armijo_max_halvings; ++halving) {
    Vector trial = state.w + s * work.d;
    const bool exact_zero = halving == 0 && ls.zero_index.has_value();
    if (exact_zero) trial[*ls.zero_index] = 0.0;
    const double f1 = penalized(trial);
    if (std::isfinite(f1) && f1 <= f0 + params.c1 * s * info.decrement) {
      state.w = std::move(trial);
      state.objective = f1;
      for (Index i = 0; i < data.m(); ++i) state.inactive[static_cast<std::size_t>(i)] = state.w[i] == 0.0;
      std::erase_if(state.candidates,
                    [&](Index j) { return !state.inactive[static_cast<std::size_t>(j)]; });
      info.outcome = StepOutcome::moved;
      info.step = s;
      info.armijo_halvings = halving;
      if (exact_zero) info.zero_index = ls.zero_index;
      report.objective_trace.push_back(f1);
      return info;
    }
    s *= 0.5;
  }
  std::ostringstream msg;
  msg << "Armijo backtracking exhausted " << params.armijo_max_halvings
      << " halvings (eps=" << state.eps << ", d^T g~=" << info.decrement
      << ", exact step=" << ls.s_star << ", f=" << f0 << ")";
  throw StallError(msg.str());
}

bool adjust_active_set(SolverState& state, const Vector& g, double mu, double beta,
                       std::optional<double> kkt_tol) {
  std::vector<Index> scan = activation_scan(g, state.inactive, mu);
  if (scan != state.candidates) {
    for (Index j : scan) state.inactive[static_cast<std::size_t>(j)] = false;
    state.candidates = std::move(scan);
    return false;
  }
  if (kkt_tol && !scan.empty()) {
    // The scan repeats because its coordinates were frozen again by zero
    // steps. Alone, the largest violator gets a correctly signed direction.
    const auto worst = std::max_element(scan.begin(), scan.end(), [&](Index a, Index b) {
      return std::abs(g[a]) < std::abs(g[b]);
    });
    if (std::abs(g[*worst]) - mu > *kkt_tol) {
      state.inactive[static_cast<std::size_t>(*worst)] = false;
      return false;
    }
  }
  state.eps /= beta;
  state.objective.reset();
  return true;
}

double kkt_residual(const Vector& g, const Vector& w, double mu) {
  double r = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0) {
      r = std::max(r, std::abs(g[i] + mu * sign(w[i])));
    } else {
      r = std::max(r, std::abs(g[i]) - mu);
    }
  }
  return r;
}

double kkt_residual(const Dataset& data, const Vector& w, const HyperParams& params, double eps,
                    SolveReport* report) {
  return kkt_residual(gradient_smooth(data, w, params.lambda, eps, report), w, params.mu);
}

SolveResult svm_smooth(const Dataset& data, const HyperParams& params,
                       const std::optional<Vector>& w0, const StepObserver& observer) {
  validate(params);
  const auto start = std::chrono::steady_clock::now();
  SolveResult result;
  SolveReport& report = result.report;
  SolverState state = initial_state(data, params, w0, report);

  std::uint64_t phase = 0;
  // Smoothed gradient at the current w from the last converged step.
  std::optional<Vector> gradient;
  double gradient_eps = state.eps;
  bool completed = false;
  while (state.eps > params.eps_min / params.beta) {
    if (report.iterations >= static_cast<std::uint64_t>(params.max_outer_iters)) {
      report.status = "iteration_cap";
      break;
    }
    ++report.iterations;
    NewtonTolerance tol;
    if (state.eps <= params.eps_min) tol.active_kkt = params.kkt_tol;

    const std::vector<bool> before = state.inactive;
    StepInfo info;
    try {
      info = newton_step(data, state, params, report, tol);
    } catch (const StallError& e) {
      throw StallError("iteration " + std::to_string(report.iterations) + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(report.iterations) + ": " + e.what());
    }

    StepRecord rec;
    rec.iteration = report.iterations;
    rec.eps = state.eps;
    rec.phase = phase;
    rec.outcome = info.outcome;
    rec.step = info.step;
    rec.deactivated = info.deactivated.size();
    for (std::size_t i = 0; i < before.size(); ++i) {
      if (state.inactive[i] && !before[i]) ++rec.entered_inactive;
    }
    rec.entered_inactive -= std::min(rec.entered_inactive, rec.deactivated);

    if (info.outcome == StepOutcome::moved) {
      gradient.reset();
      rec.objective = *state.objective;
      for (Index i = 0; i < data.m(); ++i) {
        if (state.inactive[static_cast<std::size_t>(i)] != (state.w[i] == 0.0)) {
          rec.inactive_is_zero_set = false;
        }
      }
      if (observer) observer(rec);
      continue;
    }

    rec.objective = state.objective.value_or(std::numeric_limits<double>::quiet_NaN());
    if (observer) observer(rec);
    gradient = std::move(info.work.g);
    gradient_eps = state.eps;
    adjust_active_set(state, *gradient, params.mu, params.beta, tol.active_kkt);
    ++phase;
  }
  completed = !(state.eps > params.eps_min / params.beta);

  result.w = std::move(state.w);
  // The last smoothing level actually optimized.
  report.final_eps = completed ? state.eps * params.beta : state.eps;
  if (gradient && gradient_eps == report.final_eps) {
    report.final_kkt = kkt_residual(*gradient, result.w, params.mu);
  } else {
    report.final_kkt = kkt_residual(data, result.w, params, report.final_eps, &report);
  }
  report.final_nnz = count_nonzeros(result.w);
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace smsvm
