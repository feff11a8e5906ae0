#include "smsvm/loss.hpp"

#include <cmath>

namespace smsvm {

namespace {

void check_dims(const Dataset& data, const Vector& w) {
  if (w.size() != data.m()) {
    throw std::invalid_argument("weight dimension " + std::to_string(w.size()) +
                                " does not match feature dimension " + std::to_string(data.m()));
  }
}

void check_eps(double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("smoothing parameter must be > 0");
}

}  // namespace

// For u < 0 the direct forms cancel catastrophically; both branches below are
// the same closed form rearranged.
double smoothed_hinge(double u, double eps) {
  const double r = std::hypot(eps, u);
  if (u >= 0.0) return 0.5 * (u + r);
  return 0.5 * eps * eps / (r - u);
}

double smoothed_hinge_d1(double u, double eps) {
  const double r = std::hypot(eps, u);
  if (u >= 0.0) return 0.5 * (1.0 + u / r);
  return 0.5 * eps * eps / (r * (r - u));
}

double smoothed_hinge_d2(double u, double eps) {
  const double r = std::hypot(eps, u);
  return 0.5 * eps * eps / (r * r * r);
}

Vector margins(const Dataset& data, const Vector& w) {
  check_dims(data, w);
  Vector u = data.features() * w;
  return Vector::Ones(data.n()) - data.labels().cwiseProduct(u);
}

double objective_smooth(const Dataset& data, const Vector& w, double lambda, double eps,
                        SolveReport* report) {
  check_eps(eps);
  const Vector u = margins(data, w);
  double sum = 0.0;
  for (Index i = 0; i < u.size(); ++i) sum += smoothed_hinge(u[i], eps);
  if (report) count_data_pass(*report, PassKind::objective);
  return 0.5 * lambda * w.squaredNorm() + sum / static_cast<double>(data.n());
}

double objective_penalized(const Dataset& data, const Vector& w, const HyperParams& params,
                           double eps, SolveReport* report) {
  return objective_smooth(data, w, params.lambda, eps, report) + params.mu * w.lpNorm<1>();
}

Vector gradient_smooth(const Dataset& data, const Vector& w, double lambda, double eps,
                       SolveReport* report) {
  check_eps(eps);
  const Vector u = margins(data, w);
  Vector coef(data.n());
  for (Index i = 0; i < u.size(); ++i) {
    coef[i] = smoothed_hinge_d1(u[i], eps) * data.labels()[i];
  }
  Vector g = lambda * w;
  g.noalias() -= (data.features().transpose() * coef) / static_cast<double>(data.n());
  if (report) count_data_pass(*report, PassKind::gradient);
  return g;
}

Matrix hessian_active(const Dataset& data, const Vector& w, double lambda, double eps,
                      std::span<const Index> active, SolveReport* report) {
  check_eps(eps);
  const Vector u = margins(data, w);
  const auto k = static_cast<Index>(active.size());
  std::vector<Index> position(static_cast<std::size_t>(data.m()), -1);
  for (Index a = 0; a < k; ++a) {
    const Index j = active[static_cast<std::size_t>(a)];
    if (j < 0 || j >= data.m()) throw std::invalid_argument("active index out of range");
    position[static_cast<std::size_t>(j)] = a;
  }

  // Rows are gathered into dense blocks of sqrt(j'') x_A and accumulated
  // with symmetric rank-k updates, in row order.
  constexpr Index kBlock = 256;
  Matrix h = Matrix::Zero(k, k);
  Matrix block(std::min(kBlock, data.n()), k);
  for (Index start = 0; start < data.n(); start += kBlock) {
    const Index rows = std::min(kBlock, data.n() - start);
    block.topRows(rows).setZero();
    for (Index r = 0; r < rows; ++r) {
      const Index i = start + r;
      const double root = std::sqrt(smoothed_hinge_d2(u[i], eps));
      for (SparseRowMatrix::InnerIterator it(data.features(), i); it; ++it) {
        const Index p = position[static_cast<std::size_t>(it.col())];
        if (p >= 0) block(r, p) = root * it.value();
      }
    }
    h.selfadjointView<Eigen::Lower>().rankUpdate(block.topRows(rows).transpose());
  }
  h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
  h /= static_cast<double>(data.n());
  h.diagonal().array() += lambda;
  if (report) count_data_pass(*report, PassKind::hessian);
  return h;
}

double objective_hinge(const Dataset& data, const Vector& w, double lambda, SolveReport* report) {
  const Vector u = margins(data, w);
  const double sum = u.cwiseMax(0.0).sum();
  if (report) count_data_pass(*report, PassKind::objective);
  return 0.5 * lambda * w.squaredNorm() + sum / static_cast<double>(data.n());
}

}  // namespace smsvm
