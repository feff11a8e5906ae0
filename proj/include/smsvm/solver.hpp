#pragma once

#include "smsvm/core.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace smsvm {

/// Iterate plus the active-set bookkeeping of the smoothed l1/l2 Newton method.
///
/// `inactive` marks the coordinates frozen at zero for the next Newton system.
/// At every accepted iterate it equals the exact-zero set of `w`; between an
/// activation and the next step, newly activated coordinates are zero but no
/// longer inactive. `candidates` is the last activation scan.
struct SolverState {
  Vector w;
  std::vector<bool> inactive;
  std::vector<Index> candidates;
  double eps = 1.0;
  /// Penalized objective at (w, eps), if known.
  std::optional<double> objective;
};

/// Quantities assembled by one Newton step.
struct NewtonWork {
  Vector g;
  Vector g_tilde;
  Vector d;
  std::vector<Index> active;
};

enum class StepOutcome { converged, moved };

struct StepInfo {
  StepOutcome outcome = StepOutcome::converged;
  NewtonWork work;
  double decrement = 0.0;  // d^T g_tilde
  double step = 0.0;
  std::optional<Index> zero_index;
  int armijo_halvings = 0;
  /// Activated coordinates pushed back to the inactive set because the exact
  /// line search returned a zero step.
  std::vector<Index> deactivated;
  /// Stationarity residual of the active block at the pre-step iterate.
  double active_kkt = 0.0;
};

/// Convergence thresholds for newton_step; the defaults reproduce the
/// |d^T g_tilde| < eps / newton_tol_factor rule.
struct NewtonTolerance {
  std::optional<double> decrement;
  /// When set, the active block must also satisfy this stationarity bound.
  std::optional<double> active_kkt;
};

/// { i in inactive : |g_i| > mu }, ascending.
std::vector<Index> activation_scan(const Vector& g, const std::vector<bool>& inactive, double mu);

/// Inactive set = exact zeros of w, with the initial activation scan removed
/// from it. Costs one gradient pass.
SolverState initial_state(const Dataset& data, const HyperParams& params,
                          const std::optional<Vector>& w0, SolveReport& report);

/// One active-set Newton step at the current smoothing level. Updates `state`
/// in place when the step is accepted.
StepInfo newton_step(const Dataset& data, SolverState& state, const HyperParams& params,
                     SolveReport& report, const NewtonTolerance& tol = {});

/// Called after a converged Newton step. Either activates the coordinates of a
/// changed scan or, when the scan is unchanged, divides eps by beta. Returns
/// true when eps was reduced.
///
/// With kkt_tol set, an unchanged scan whose largest violation |g_i| - mu
/// exceeds kkt_tol activates that single coordinate instead of reducing eps.
bool adjust_active_set(SolverState& state, const Vector& g, double mu, double beta,
                       std::optional<double> kkt_tol = std::nullopt);

/// max over the support of |g_i + mu sign(w_i)| and over the zeros of
/// (|g_i| - mu)_+, with g the smoothed gradient at (w, eps).
double kkt_residual(const Dataset& data, const Vector& w, const HyperParams& params, double eps,
                    SolveReport* report = nullptr);
double kkt_residual(const Vector& g, const Vector& w, double mu);

/// Per-step record handed to an optional observer.
struct StepRecord {
  std::uint64_t iteration = 0;
  double eps = 0.0;
  /// Incremented whenever eps or the inactive set is changed by
  /// adjust_active_set; objective values are monotone within a phase.
  std::uint64_t phase = 0;
  StepOutcome outcome = StepOutcome::converged;
  double objective = 0.0;
  double step = 0.0;
  std::size_t entered_inactive = 0;
  std::size_t deactivated = 0;
  bool inactive_is_zero_set = true;
};

using StepObserver = std::function<void(const StepRecord&)>;

struct SolveResult {
  Vector w;
  SolveReport report;
};

/// Smoothing continuation around newton_step/adjust_active_set until
/// eps <= eps_min / beta. At the last level the active block is driven to
/// params.kkt_tol before the loop may finish.
SolveResult svm_smooth(const Dataset& data, const HyperParams& params,
                       const std::optional<Vector>& w0 = std::nullopt,
                       const StepObserver& observer = {});

}  // namespace smsvm
