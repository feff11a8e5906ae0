#pragma once

#include "smsvm/core.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>

namespace smsvm {

// Comparison optimizers on the exact hinge objective
//   lambda/2 ||w||^2 + (1/n) sum_i max(0, 1 - y_i x_i^T w).

enum class BaselineMethod { subgrad, sgd, cg, cg_l2 };

std::string to_string(BaselineMethod method);

/// eta_t = eta0 / (1 + t / t0), or 1 / (lambda (t + 1)) for inverse_lambda.
struct StepSchedule {
  enum class Kind { decaying, inverse_lambda };
  Kind kind = Kind::decaying;
  double eta0 = 0.1;
  double t0 = 100.0;

  double at(std::uint64_t t, double lambda) const;
};

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::subgrad;
  StepSchedule step;
  Index batch_size = 32;
  /// Step count for subgrad/sgd, iteration count for CG.
  int max_iters = 1000;
  /// Ignored by method cg, which minimizes the unregularized hinge.
  double lambda = 1e-2;
  double c1 = 1e-4;
  int armijo_max_halvings = 40;
  std::uint64_t seed = 0;
  std::optional<Vector> w0;
};

/// lambda w - (1/|B|) sum over i in B with 1 - y_i x_i^T w > 0 of y_i x_i.
/// The zero element is chosen at the kink. Without a batch all rows are used.
Vector hinge_subgradient(const Dataset& data, const Vector& w, double lambda,
                         std::optional<std::span<const Index>> batch = std::nullopt,
                         SolveReport* report = nullptr);

struct BaselineResult {
  Vector w;
  SolveReport report;
};

/// Full-batch subgradient descent; returns the last iterate.
BaselineResult subgradient_descent(const Dataset& data, const BaselineConfig& config);

/// Mini-batch stochastic subgradient descent. Batches are drawn without
/// replacement from a permutation reshuffled every epoch; each batch is summed
/// in row order, so batch_size = n reproduces subgradient_descent.
BaselineResult sgd(const Dataset& data, const BaselineConfig& config);

/// Nonlinear conjugate gradient with the Polak-Ribiere+ coefficient on the
/// hinge objective, a subgradient standing in for the gradient.
BaselineResult cg_polak_ribiere_plus(const Dataset& data, const BaselineConfig& config);

/// Objective/gradient pair for the generic CG driver.
struct SmoothProblem {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

/// PR+ CG on an arbitrary problem. Line search: Armijo backtracking whose
/// trial steps come from safeguarded quadratic interpolation, starting at 1.
/// Stops when ||g|| <= grad_tol or no step gives sufficient decrease.
BaselineResult cg_polak_ribiere_plus(const SmoothProblem& problem, Vector w0, int max_iters,
                                     double c1, int armijo_max_halvings, double grad_tol = 0.0);

/// The PR+ coefficient max(0, g^T (g - g_prev) / ||g_prev||^2).
double polak_ribiere_plus(const Vector& g, const Vector& g_prev);

}  // namespace smsvm
