#include "commands.hpp"

#include "smsvm/solver.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

namespace {

using namespace smsvm;
using namespace smsvm::cli;

void add_method_options(CLI::App& cmd, MethodSpec& spec) {
  cmd.add_option("--method", spec.method, "Optimizer")
      ->check(CLI::IsMember(method_names()))
      ->capture_default_str();
  cmd.add_option("--lambda", spec.lambda, "l2 weight")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd.add_option("--mu", spec.mu, "l1 weight")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd.add_option("--eps0", spec.eps0, "Initial smoothing parameter")->capture_default_str();
  cmd.add_option("--eps-min", spec.eps_min, "Final smoothing parameter")->capture_default_str();
  cmd.add_option("--beta", spec.beta, "Smoothing reduction factor")->capture_default_str();
  cmd.add_option("--c1", spec.c1, "Armijo constant")->capture_default_str();
  cmd.add_option("--kkt-tol", spec.kkt_tol, "KKT tolerance at the final smoothing level")->capture_default_str();
  cmd.add_option("--max-outer-iters", spec.max_outer_iters, "Newton iteration cap")->capture_default_str();
  cmd.add_option("--max-iters", spec.max_iters, "Baseline iteration cap")->capture_default_str();
  cmd.add_option("--epochs", spec.epochs, "SGD epochs (overrides --max-iters when positive)")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--batch-size", spec.batch_size, "Mini-batch size for ssgd-mb")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--eta0", spec.eta0, "Initial step size for subgradient methods")->capture_default_str();
  cmd.add_option("--t0", spec.t0, "Step decay horizon")->capture_default_str();
  cmd.add_option("--seed", spec.seed, "Random seed")->capture_default_str();
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse smoothed-hinge SVM solver and benchmark harness"};
  app.require_subcommand(1);

  // train
  MethodSpec train_spec;
  std::string train_data;
  std::string train_out;
  std::string train_report;
  bool train_bias = false;
  std::optional<double> train_positive;
  auto* train = app.add_subcommand("train", "Fit a model on a libSVM file");
  add_method_options(*train, train_spec);
  train->add_option("--data", train_data, "Training data (libSVM, optionally .gz)")->required();
  train->add_option("--out", train_out, "Model JSON output")->required();
  train->add_option("--report", train_report, "Run report JSON output");
  train->add_flag("--bias", train_bias, "Append a constant feature");
  train->add_option("--positive-label", train_positive, "Read labels one-vs-rest with this label as +1");

  // predict
  std::string predict_model;
  std::string predict_data;
  std::string predict_out;
  bool allow_mismatch = false;
  auto* predict_cmd = app.add_subcommand("predict", "Score a libSVM file with a trained model");
  predict_cmd->add_option("--model", predict_model, "Model JSON")->required();
  predict_cmd->add_option("--data", predict_data, "Data to score")->required();
  predict_cmd->add_option("--out", predict_out, "Write one predicted label per line");
  predict_cmd->add_flag("--allow-dim-mismatch", allow_mismatch,
                        "Ignore features beyond the model's dimension");

  // bench
  std::string bench_config;
  std::string bench_csv;
  std::string bench_json;
  int bench_jobs = 1;
  bool no_timing = false;
  bool print_table = false;
  auto* bench = app.add_subcommand("bench", "Run a benchmark configuration");
  bench->add_option("--config", bench_config, "Benchmark JSON config")->required();
  bench->add_option("--out-csv", bench_csv, "Per-run and aggregate rows as CSV (stdout when omitted)");
  bench->add_option("--out-json", bench_json, "Per-run and aggregate rows as JSON");
  bench->add_option("--jobs", bench_jobs, "Worker threads")->check(CLI::PositiveNumber);
  bench->add_flag("--no-timing", no_timing, "Write time_s as 0 so output is byte-reproducible");
  bench->add_flag("--table", print_table, "Print an accuracy/time table to stdout");

  // gen
  SyntheticSpec gen_spec;
  std::string gen_out;
  std::string gen_test_out;
  auto* gen = app.add_subcommand("gen", "Generate a two-centroid synthetic dataset");
  gen->add_option("--n", gen_spec.n, "Samples")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--m", gen_spec.m, "Features")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--centroid-scale", gen_spec.centroid_scale, "Centroid scale")->capture_default_str();
  gen->add_option("--sparsity", gen_spec.sparsity, "Fraction of zeroed centroid entries")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  gen->add_option("--seed", gen_spec.seed, "Random seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output libSVM file")->required();
  gen->add_option("--test-out", gen_test_out, "Held-out samples from the same centroids");
  gen->add_option("--n-test", gen_spec.n_test, "Held-out sample count")->check(CLI::NonNegativeNumber);

  // smooth-curve
  Index curve_n = 200;
  std::uint64_t curve_seed = 0;
  double curve_eps = 0.0;
  double w_min = -1.0;
  double w_max = 5.0;
  int curve_points = 601;
  std::string curve_out;
  auto* curve = app.add_subcommand("smooth-curve", "Mean loss of the 1-D interval data over a w grid");
  curve->add_option("--n", curve_n, "Samples")->check(CLI::Range(Index{2}, Index{1} << 40))->capture_default_str();
  curve->add_option("--seed", curve_seed, "Random seed")->capture_default_str();
  curve->add_option("--eps", curve_eps, "Smoothing parameter (0 = exact hinge)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  curve->add_option("--w-min", w_min, "Grid start")->capture_default_str();
  curve->add_option("--w-max", w_max, "Grid end")->capture_default_str();
  curve->add_option("--points", curve_points, "Grid size")->check(CLI::Range(2, 100000000))->capture_default_str();
  curve->add_option("--out", curve_out, "CSV output (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      if (train_spec.method == "smsvm-l2") train_spec.mu = 0.0;
      validate(train_spec);
      ParseOptions parse;
      parse.positive_label = train_positive;
      ParsedData parsed = read_libsvm(train_data, parse);
      Model model;
      model.dim = parsed.data.m();
      model.bias = train_bias;
      model.labels = parsed.labels;
      model.spec = train_spec;
      const Dataset data = train_bias ? parsed.data.with_bias_feature() : parsed.data;
      Trained trained = run_method(data, train_spec);
      model.w = trained.w;
      write_json(train_out, to_json(model));
      json report = report_to_json(trained.report, train_spec.method);
      report["train_accuracy"] = accuracy(trained.w, data);
      if (!train_report.empty()) write_json(train_report, report);
      std::cout << "method: " << train_spec.method << "\n"
                << "status: " << trained.report.status << "\n"
                << "train accuracy: " << format_accuracy(accuracy(trained.w, data)) << "\n"
                << "nnz: " << trained.report.final_nnz << " / " << trained.w.size() << "\n"
                << "time_s: " << trained.report.wall_time << "\n";
    } else if (*predict_cmd) {
      const Model model = model_from_json(read_json(predict_model));
      const Dataset data = align_to_model(read_libsvm(predict_data).data, model, allow_mismatch);
      const std::vector<int> labels = predict(model.w, data);
      if (!predict_out.empty()) {
        std::ofstream out(predict_out);
        if (!out) throw std::runtime_error("cannot write " + predict_out);
        for (int y : labels) out << (y > 0 ? model.labels.positive : model.labels.negative) << '\n';
      }
      std::cout << "accuracy: " << format_accuracy(accuracy(model.w, data)) << "\n";
    } else if (*bench) {
      const std::filesystem::path config_path = bench_config;
      const json config = read_json(config_path);
      BenchOptions options;
      options.jobs = bench_jobs;
      options.record_time = !no_timing;
      options.base_dir = config_path.parent_path().empty() ? "." : config_path.parent_path();
      const BenchResult result = run_bench(config, options);
      if (bench_csv.empty()) {
        if (!print_table) write_bench_csv(std::cout, result);
      } else {
        std::ofstream out(bench_csv);
        if (!out) throw std::runtime_error("cannot write " + bench_csv);
        write_bench_csv(out, result);
      }
      if (!bench_json.empty()) write_json(bench_json, bench_to_json(result, config));
      if (print_table) write_bench_table(std::cout, result);
    } else if (*gen) {
      if (!gen_test_out.empty() && gen_spec.n_test == 0) gen_spec.n_test = gen_spec.n;
      const SyntheticData generated = generate_synthetic(gen_spec);
      auto write = [](const std::string& path, const Dataset& data) {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        write_libsvm(out, data);
      };
      write(gen_out, generated.train);
      if (!gen_test_out.empty()) write(gen_test_out, *generated.test);
    } else if (*curve) {
      const auto points = smooth_curve(curve_n, curve_seed, curve_eps, w_min, w_max, curve_points);
      std::ofstream file;
      if (!curve_out.empty()) {
        file.open(curve_out);
        if (!file) throw std::runtime_error("cannot write " + curve_out);
      }
      std::ostream& out = curve_out.empty() ? std::cout : file;
      out.precision(17);
      out << "w,loss\n";
      for (const auto& [w, loss] : points) out << w << ',' << loss << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
