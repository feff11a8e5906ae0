#include "smsvm/baselines.hpp"

#include "smsvm/loss.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace smsvm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Vector start_point(const Dataset& data, const BaselineConfig& config) {
  if (!config.w0) return Vector::Zero(data.m());
  if (config.w0->size() != data.m()) throw std::invalid_argument("initial weights have the wrong dimension");
  return *config.w0;
}

void check_config(const BaselineConfig& config) {
  if (config.max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  if (config.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(config.lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
}

double effective_lambda(const BaselineConfig& config) {
  return config.method == BaselineMethod::cg ? 0.0 : config.lambda;
}

void finish(BaselineResult& result, const Dataset& data, double lambda, Clock::time_point start) {
  result.report.wall_time = seconds_since(start);
  result.report.final_nnz = count_nonzeros(result.w);
  // Reported for comparison only; not part of the optimizer's cost.
  if (result.report.objective_trace.empty()) {
    result.report.objective_trace.push_back(objective_hinge(data, result.w, lambda));
  }
}

BaselineResult cg_impl(const SmoothProblem& problem, Vector w, int max_iters, double c1,
                       int max_halvings, double grad_tol, SolveReport& report) {
  BaselineResult result;
  double f = problem.value(w);
  Vector g = problem.gradient(w);
  if (!std::isfinite(f) || !g.allFinite()) throw NumericalError("non-finite objective or gradient at start");
  Vector d = -g;
  report.objective_trace.push_back(f);

  for (int iter = 0; iter < max_iters; ++iter) {
    if (g.norm() <= grad_tol) {
      report.status = "converged";
      break;
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      d = -g;
      slope = -g.squaredNorm();
    }

    // Backtracking from s = 1; each rejected trial is replaced by the
    // minimizer of the quadratic through f(0), f'(0), f(s), kept in [s/10, s/2].
    double s = 1.0;
    bool accepted = false;
    double f_new = f;
    Vector w_new;
    for (int k = 0; k <= max_halvings; ++k) {
      w_new = w + s * d;
      f_new = problem.value(w_new);
      const double curvature = f_new - f - slope * s;
      const double s_quad = curvature > 0.0 ? -slope * s * s / (2.0 * curvature) : 0.0;
      if (std::isfinite(f_new) && f_new <= f + c1 * s * slope) {
        if (k == 0 && s_quad > 0.0 && s_quad != s) {
          Vector w_quad = w + s_quad * d;
          const double f_quad = problem.value(w_quad);
          if (std::isfinite(f_quad) && f_quad < f_new && f_quad <= f + c1 * s_quad * slope) {
            w_new = std::move(w_quad);
            f_new = f_quad;
          }
        }
        accepted = true;
        break;
      }
      s = std::isfinite(f_new) && s_quad > 0.0 ? std::clamp(s_quad, 0.1 * s, 0.5 * s) : 0.5 * s;
    }
    if (!accepted) {
      report.status = "line_search_stalled";
      break;
    }

    Vector g_new = problem.gradient(w_new);
    if (!g_new.allFinite()) throw NumericalError("non-finite gradient");
    const double beta = polak_ribiere_plus(g_new, g);
    d = -g_new + beta * d;
    w = std::move(w_new);
    g = std::move(g_new);
    f = f_new;
    report.objective_trace.push_back(f);
    ++report.iterations;
  }
  result.w = std::move(w);
  return result;
}

}  // namespace

std::string to_string(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::subgrad: return "subgrad";
    case BaselineMethod::sgd: return "sgd";
    case BaselineMethod::cg: return "cg";
    case BaselineMethod::cg_l2: return "cg_l2";
  }
  return "unknown";
}

double StepSchedule::at(std::uint64_t t, double lambda) const {
  if (kind == Kind::inverse_lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("inverse_lambda schedule needs lambda > 0");
    return 1.0 / (lambda * static_cast<double>(t + 1));
  }
  return eta0 / (1.0 + static_cast<double>(t) / t0);
}

Vector hinge_subgradient(const Dataset& data, const Vector& w, double lambda,
                         std::optional<std::span<const Index>> batch, SolveReport* report) {
  if (w.size() != data.m()) throw std::invalid_argument("weight dimension mismatch");
  Vector g = lambda * w;
  const auto& x = data.features();
  const auto& y = data.labels();
  auto accumulate = [&](Index i, Vector& acc) {
    const double u = 1.0 - y[i] * x.row(i).dot(w);
    if (u > 0.0) acc += y[i] * x.row(i).transpose();
  };
  Vector acc = Vector::Zero(data.m());
  Index rows = data.n();
  if (batch) {
    if (batch->empty()) throw std::invalid_argument("empty batch");
    for (Index i : *batch) {
      if (i < 0 || i >= data.n()) throw std::out_of_range("batch index out of range");
      accumulate(i, acc);
    }
    rows = static_cast<Index>(batch->size());
  } else {
    for (Index i = 0; i < data.n(); ++i) accumulate(i, acc);
  }
  g -= acc / static_cast<double>(rows);
  if (report) count_partial_pass(*report, PassKind::gradient, rows, data.n());
  return g;
}

BaselineResult subgradient_descent(const Dataset& data, const BaselineConfig& config) {
  check_config(config);
  const auto start = Clock::now();
  const double lambda = effective_lambda(config);
  BaselineResult result;
  result.w = start_point(data, config);
  for (int t = 0; t < config.max_iters; ++t) {
    const Vector g = hinge_subgradient(data, result.w, lambda, std::nullopt, &result.report);
    result.w -= config.step.at(static_cast<std::uint64_t>(t), lambda) * g;
    if (!result.w.allFinite()) throw NumericalError("subgradient descent diverged");
    ++result.report.iterations;
  }
  finish(result, data, lambda, start);
  return result;
}

BaselineResult sgd(const Dataset& data, const BaselineConfig& config) {
  check_config(config);
  if (config.batch_size > data.n()) throw std::invalid_argument("batch_size exceeds sample count");
  const auto start = Clock::now();
  const double lambda = effective_lambda(config);
  BaselineResult result;
  result.w = start_point(data, config);

  std::mt19937_64 rng(config.seed);
  std::vector<Index> order(static_cast<std::size_t>(data.n()));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t pos = 0;
  std::vector<Index> batch(static_cast<std::size_t>(config.batch_size));

  for (int t = 0; t < config.max_iters; ++t) {
    if (pos + batch.size() > order.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      pos = 0;
    }
    std::copy_n(order.begin() + static_cast<std::ptrdiff_t>(pos), batch.size(), batch.begin());
    std::sort(batch.begin(), batch.end());
    pos += batch.size();
    const Vector g = hinge_subgradient(data, result.w, lambda, std::span<const Index>(batch),
                                       &result.report);
    result.w -= config.step.at(static_cast<std::uint64_t>(t), lambda) * g;
    if (!result.w.allFinite()) throw NumericalError("SGD diverged");
    ++result.report.iterations;
  }
  finish(result, data, lambda, start);
  return result;
}

double polak_ribiere_plus(const Vector& g, const Vector& g_prev) {
  const double denom = g_prev.squaredNorm();
  if (denom == 0.0) return 0.0;
  return std::max(0.0, g.dot(g - g_prev) / denom);
}

BaselineResult cg_polak_ribiere_plus(const SmoothProblem& problem, Vector w0, int max_iters,
                                     double c1, int armijo_max_halvings, double grad_tol) {
  const auto start = Clock::now();
  SolveReport report;
  BaselineResult result = cg_impl(problem, std::move(w0), max_iters, c1, armijo_max_halvings,
                                  grad_tol, report);
  result.report = std::move(report);
  result.report.wall_time = seconds_since(start);
  result.report.final_nnz = count_nonzeros(result.w);
  return result;
}

BaselineResult cg_polak_ribiere_plus(const Dataset& data, const BaselineConfig& config) {
  check_config(config);
  const auto start = Clock::now();
  const double lambda = effective_lambda(config);
  SolveReport report;
  SmoothProblem problem{
      [&](const Vector& w) { return objective_hinge(data, w, lambda, &report); },
      [&](const Vector& w) { return hinge_subgradient(data, w, lambda, std::nullopt, &report); }};
  BaselineResult result = cg_impl(problem, start_point(data, config), config.max_iters, config.c1,
                                  config.armijo_max_halvings, 0.0, report);
  result.report = std::move(report);
  finish(result, data, lambda, start);
  return result;
}

}  // namespace smsvm
