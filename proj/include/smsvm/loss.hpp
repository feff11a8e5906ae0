#pragma once

#include "smsvm/core.hpp"

#include <span>

namespace smsvm {

// Smoothed hinge j_eps(u) = (u + sqrt(eps^2 + u^2)) / 2 and its derivatives.
// The value lies within eps/2 above max(0,u); eps = 0 gives the exact hinge.
double smoothed_hinge(double u, double eps);
double smoothed_hinge_d1(double u, double eps);
double smoothed_hinge_d2(double u, double eps);

/// u_i = 1 - y_i x_i^T w. Not counted as a data pass on its own.
Vector margins(const Dataset& data, const Vector& w);

/// lambda/2 ||w||^2 + (1/n) sum_i j_eps(u_i). Counts one objective pass when
/// a report is supplied.
double objective_smooth(const Dataset& data, const Vector& w, double lambda, double eps,
                        SolveReport* report = nullptr);

/// objective_smooth + mu ||w||_1.
double objective_penalized(const Dataset& data, const Vector& w, const HyperParams& params,
                           double eps, SolveReport* report = nullptr);

/// lambda w - (1/n) sum_i j_eps'(u_i) y_i x_i.
Vector gradient_smooth(const Dataset& data, const Vector& w, double lambda, double eps,
                       SolveReport* report = nullptr);

/// lambda I + (1/n) X_A^T diag(j_eps''(u)) X_A over the columns listed in
/// `active` (in that order). Never forms the m x m matrix.
Matrix hessian_active(const Dataset& data, const Vector& w, double lambda, double eps,
                      std::span<const Index> active, SolveReport* report = nullptr);

/// Mean exact hinge loss plus lambda/2 ||w||^2.
double objective_hinge(const Dataset& data, const Vector& w, double lambda,
                       SolveReport* report = nullptr);

}  // namespace smsvm
