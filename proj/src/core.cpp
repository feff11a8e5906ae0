#include "smsvm/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smsvm {

namespace {

SparseRowMatrix build_matrix(const std::vector<SparseRow>& rows, Index dim) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.indices.size() != row.values.size()) {
      throw std::invalid_argument("row " + std::to_string(r) + ": index/value length mismatch");
    }
    std::vector<Index> sorted = row.indices;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("row " + std::to_string(r) + ": duplicate feature index");
    }
    for (std::size_t k = 0; k < row.indices.size(); ++k) {
      const Index j = row.indices[k];
      if (j < 0 || j >= dim) {
        throw std::invalid_argument("row " + std::to_string(r) + ": feature index " +
                                    std::to_string(j) + " outside [0," + std::to_string(dim) + ")");
      }
      triplets.emplace_back(static_cast<Index>(r), j, row.values[k]);
    }
  }
  SparseRowMatrix x(static_cast<Index>(rows.size()), dim);
  x.setFromTriplets(triplets.begin(), triplets.end());
  x.makeCompressed();
  return x;
}

}  // namespace

Dataset::Dataset(std::vector<SparseRow> rows, std::vector<double> labels, Index dim) {
  if (rows.size() != labels.size()) {
    throw std::invalid_argument("row count and label count differ");
  }
  if (dim < 1) throw std::invalid_argument("feature dimension must be >= 1");
  features_ = build_matrix(rows, dim);
  labels_ = Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size()));
  validate();
}

Dataset::Dataset(SparseRowMatrix features, Vector labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  features_.makeCompressed();
  validate();
}

void Dataset::validate() const {
  if (features_.rows() < 1) throw std::invalid_argument("dataset needs at least one sample");
  if (features_.cols() < 1) throw std::invalid_argument("feature dimension must be >= 1");
  if (labels_.size() != features_.rows()) {
    throw std::invalid_argument("row count and label count differ");
  }
  for (Index i = 0; i < labels_.size(); ++i) {
    if (labels_[i] != 1.0 && labels_[i] != -1.0) {
      std::ostringstream msg;
      msg << "label of sample " << i << " is " << labels_[i] << ", expected -1 or +1";
      throw std::invalid_argument(msg.str());
    }
  }
}

Dataset Dataset::subset(std::span<const Index> rows) const {
  std::vector<Eigen::Triplet<double>> triplets;
  Vector y(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index src = rows[r];
    if (src < 0 || src >= n()) throw std::out_of_range("subset row out of range");
    for (SparseRowMatrix::InnerIterator it(features_, src); it; ++it) {
      triplets.emplace_back(static_cast<Index>(r), it.col(), it.value());
    }
    y[static_cast<Index>(r)] = labels_[src];
  }
  SparseRowMatrix x(static_cast<Index>(rows.size()), m());
  x.setFromTriplets(triplets.begin(), triplets.end());
  return Dataset(std::move(x), std::move(y));
}

Dataset Dataset::with_dimension(Index dim) const {
  if (dim < 1) throw std::invalid_argument("feature dimension must be >= 1");
  std::vector<Eigen::Triplet<double>> triplets;
  for (Index i = 0; i < n(); ++i) {
    for (SparseRowMatrix::InnerIterator it(features_, i); it; ++it) {
      if (it.col() < dim) triplets.emplace_back(i, it.col(), it.value());
    }
  }
  SparseRowMatrix x(n(), dim);
  x.setFromTriplets(triplets.begin(), triplets.end());
  return Dataset(std::move(x), labels_);
}

Dataset Dataset::with_bias_feature() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(features_.nonZeros() + n()));
  for (Index i = 0; i < n(); ++i) {
    for (SparseRowMatrix::InnerIterator it(features_, i); it; ++it) {
      triplets.emplace_back(i, it.col(), it.value());
    }
    triplets.emplace_back(i, m(), 1.0);
  }
  SparseRowMatrix x(n(), m() + 1);
  x.setFromTriplets(triplets.begin(), triplets.end());
  return Dataset(std::move(x), labels_);
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.n() != b.n() || a.m() != b.m() || a.labels_ != b.labels_) return false;
  for (Index i = 0; i < a.n(); ++i) {
    SparseRowMatrix::InnerIterator ia(a.features_, i);
    SparseRowMatrix::InnerIterator ib(b.features_, i);
    for (; ia && ib; ++ia, ++ib) {
      if (ia.col() != ib.col() || ia.value() != ib.value()) return false;
    }
    if (ia || ib) return false;
  }
  return true;
}

void validate(const HyperParams& p) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(std::isfinite(p.lambda) && p.lambda >= 0.0, "lambda must be >= 0");
  require(std::isfinite(p.mu) && p.mu >= 0.0, "mu must be >= 0");
  require(p.eps_min > 0.0, "eps_min must be > 0");
  require(p.eps0 >= p.eps_min, "eps0 must be >= eps_min");
  require(p.beta > 1.0, "beta must be > 1");
  require(p.c1 > 0.0 && p.c1 < 1.0, "c1 must lie in (0,1)");
  require(p.newton_tol_factor > 0.0, "newton_tol_factor must be > 0");
  require(p.kkt_tol >= 0.0, "kkt_tol must be >= 0");
  require(p.max_outer_iters >= 1, "max_outer_iters must be >= 1");
  require(p.armijo_max_halvings >= 0, "armijo_max_halvings must be >= 0");
}

void count_data_pass(SolveReport& report, PassKind kind) {
  switch (kind) {
    case PassKind::objective: ++report.obj_evals; break;
    case PassKind::gradient: ++report.grad_evals; break;
    case PassKind::hessian: ++report.hess_evals; break;
  }
  report.data_passes += 1.0;
}

void count_partial_pass(SolveReport& report, PassKind kind, Index rows, Index n) {
  switch (kind) {
    case PassKind::objective: ++report.obj_evals; break;
    case PassKind::gradient: ++report.grad_evals; break;
    case PassKind::hessian: ++report.hess_evals; break;
  }
  report.data_passes += static_cast<double>(rows) / static_cast<double>(n);
}

Index count_nonzeros(const Vector& w) {
  return static_cast<Index>((w.array() != 0.0).count());
}

}  // namespace smsvm
