#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace smsvm {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Raised when an iterate, objective or derivative stops being finite, or a
/// factorization that should succeed does not.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Armijo backtracking ran out of halvings.
class StallError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// One sparse feature vector. Indices are 0-based.
struct SparseRow {
  std::vector<Index> indices;
  std::vector<double> values;
};

/// n labelled samples with sparse features of dimension m, labels in {-1,+1}.
///
/// The feature matrix is stored row-major (CSR) so every loss evaluation is a
/// single sweep over the rows.
class Dataset {
 public:
  /// Validates the invariants: n >= 1, m >= 1, labels exactly +-1, indices
  /// unique and in range. Throws std::invalid_argument otherwise.
  Dataset(std::vector<SparseRow> rows, std::vector<double> labels, Index dim);
  Dataset(SparseRowMatrix features, Vector labels);

  Index n() const { return features_.rows(); }
  Index m() const { return features_.cols(); }
  const SparseRowMatrix& features() const { return features_; }
  const Vector& labels() const { return labels_; }

  Dataset subset(std::span<const Index> rows) const;
  /// Drops features with index >= dim, or pads with empty columns.
  Dataset with_dimension(Index dim) const;
  /// Appends a constant feature equal to 1. Its weight is penalized like any
  /// other weight.
  Dataset with_bias_feature() const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  void validate() const;

  SparseRowMatrix features_;
  Vector labels_;
};

struct HyperParams {
  double lambda = 1e-2;
  double mu = 0.0;
  double eps0 = 1.0;
  double eps_min = 1e-3;
  double beta = 2.0;
  double c1 = 1e-4;
  double newton_tol_factor = 10.0;
  /// Stationarity tolerance enforced at the last smoothing level.
  double kkt_tol = 1e-4;
  int max_outer_iters = 500;
  int armijo_max_halvings = 40;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument naming the first violated constraint.
void validate(const HyperParams& params);

enum class PassKind { objective, gradient, hessian };

struct SolveReport {
  std::vector<double> objective_trace;
  std::uint64_t grad_evals = 0;
  std::uint64_t hess_evals = 0;
  std::uint64_t obj_evals = 0;
  /// Full sweeps over the data; stochastic methods add fractional passes.
  double data_passes = 0.0;
  double wall_time = 0.0;
  double final_kkt = 0.0;
  Index final_nnz = 0;
  double final_eps = 0.0;
  std::uint64_t iterations = 0;
  std::string status = "ok";
};

void count_data_pass(SolveReport& report, PassKind kind);
/// Accounts for a gradient evaluated on `rows` of `n` samples.
void count_partial_pass(SolveReport& report, PassKind kind, Index rows, Index n);

Index count_nonzeros(const Vector& w);

inline double sign(double v) { return static_cast<double>((0.0 < v) - (v < 0.0)); }

}  // namespace smsvm
