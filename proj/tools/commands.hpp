#pragma once

#include "smsvm/baselines.hpp"
#include "smsvm/core.hpp"
#include "smsvm/data.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace smsvm::cli {

using nlohmann::json;

inline constexpr int kModelVersion = 1;
inline constexpr int kReportVersion = 1;
inline constexpr int kBenchVersion = 1;

/// Method name plus every knob any method understands. Unused knobs are
/// ignored by the method that does not need them.
struct MethodSpec {
  std::string method = "smsvm-l1l2";
  double lambda = 1e-2;
  double mu = 0.0;
  double eps0 = 1.0;
  double eps_min = 1e-3;
  double beta = 2.0;
  double c1 = 1e-4;
  double kkt_tol = 1e-4;
  int max_outer_iters = 500;
  int max_iters = 1000;
  /// For sgd/ssgd-mb: when positive, overrides max_iters with
  /// epochs * floor(n / batch_size) steps.
  int epochs = 0;
  Index batch_size = 32;
  double eta0 = 0.1;
  double t0 = 100.0;
  std::uint64_t seed = 0;
};

/// smsvm-l1l2, smsvm-l2, subgrad, sgd, ssgd-mb, cg, cg-l2.
const std::vector<std::string>& method_names();
/// Throws std::invalid_argument for unknown methods or out-of-range knobs.
void validate(const MethodSpec& spec);
HyperParams to_hyperparams(const MethodSpec& spec);
BaselineConfig to_baseline_config(const MethodSpec& spec, Index n);
MethodSpec method_from_json(const json& j, MethodSpec base = {});
json to_json(const MethodSpec& spec);

struct Trained {
  Vector w;
  SolveReport report;
};

Trained run_method(const Dataset& train, const MethodSpec& spec);

/// sign(w^T x) with ties mapped to +1.
std::vector<int> predict(const Vector& w, const Dataset& data);
/// Percentage of correct predictions.
double accuracy(const Vector& w, const Dataset& data);
std::string format_accuracy(double acc);

struct Model {
  MethodSpec spec;
  Vector w;
  /// Feature dimension of the training file, excluding the bias column.
  Index dim = 0;
  bool bias = false;
  LabelMapping labels;
};

json to_json(const Model& model);
Model model_from_json(const json& j);
json report_to_json(const SolveReport& report, const std::string& method);

/// Brings a dataset to the model's layout: checks/truncates the dimension and
/// appends the bias column. Throws std::invalid_argument on a mismatch unless
/// allow_dim_mismatch is set.
Dataset align_to_model(const Dataset& data, const Model& model, bool allow_dim_mismatch);

// Benchmark harness.

struct BenchRow {
  std::string method;
  std::string dataset;
  std::string rep;  // repetition number or "mean"
  double acc = 0.0;
  double time_s = 0.0;
  double grad_evals = 0.0;
  double hess_evals = 0.0;
  double obj_evals = 0.0;
  double data_passes = 0.0;
  double nnz = 0.0;
  std::string status = "ok";
};

struct BenchOptions {
  int jobs = 1;
  bool record_time = true;
  /// Directory against which relative dataset paths resolve.
  std::filesystem::path base_dir = ".";
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<BenchRow> aggregates;
};

BenchResult run_bench(const json& config, const BenchOptions& options);
void write_bench_csv(std::ostream& out, const BenchResult& result, bool include_aggregates = true);
json bench_to_json(const BenchResult& result, const json& config);
/// Accuracy/time pivot: one line per method, two columns per dataset.
void write_bench_table(std::ostream& out, const BenchResult& result);

/// (w, n^-1 sum_i psi(x_i, y_i; w)) over an evenly spaced grid for the
/// one-dimensional interval data. eps = 0 gives the exact hinge.
std::vector<std::pair<double, double>> smooth_curve(Index n, std::uint64_t seed, double eps,
                                                    double w_min, double w_max, int points);

}  // namespace smsvm::cli
