#include "commands.hpp"

#include "smsvm/loss.hpp"
#include "smsvm/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace smsvm::cli {

namespace {

bool is_smsvm(const std::string& method) { return method == "smsvm-l1l2" || method == "smsvm-l2"; }

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a simple combination.
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (a + 1) + 0xBF58476D1CE4E5B9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string format_number(double v) {
  std::ostringstream out;
  out << std::setprecision(6) << v;
  return out.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

BenchRow row_from_report(const SolveReport& report) {
  BenchRow row;
  row.time_s = report.wall_time;
  row.grad_evals = static_cast<double>(report.grad_evals);
  row.hess_evals = static_cast<double>(report.hess_evals);
  row.obj_evals = static_cast<double>(report.obj_evals);
  row.data_passes = report.data_passes;
  row.nnz = static_cast<double>(report.final_nnz);
  return row;
}

}  // namespace

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {"smsvm-l1l2", "smsvm-l2", "subgrad", "sgd",
                                                 "ssgd-mb",    "cg",       "cg-l2"};
  return names;
}

void validate(const MethodSpec& spec) {
  const auto& names = method_names();
  if (std::find(names.begin(), names.end(), spec.method) == names.end()) {
    throw std::invalid_argument("unknown method '" + spec.method + "'");
  }
  if (!(spec.lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (!(spec.mu >= 0.0)) throw std::invalid_argument("mu must be >= 0");
  if (spec.max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  if (spec.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (spec.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (is_smsvm(spec.method)) smsvm::validate(to_hyperparams(spec));
}

HyperParams to_hyperparams(const MethodSpec& spec) {
  HyperParams p;
  p.lambda = spec.lambda;
  p.mu = spec.method == "smsvm-l2" ? 0.0 : spec.mu;
  p.eps0 = spec.eps0;
  p.eps_min = spec.eps_min;
  p.beta = spec.beta;
  p.c1 = spec.c1;
  p.kkt_tol = spec.kkt_tol;
  p.max_outer_iters = spec.max_outer_iters;
  p.seed = spec.seed;
  return p;
}

BaselineConfig to_baseline_config(const MethodSpec& spec, Index n) {
  BaselineConfig c;
  c.lambda = spec.lambda;
  c.max_iters = spec.max_iters;
  c.c1 = spec.c1;
  c.seed = spec.seed;
  c.step.eta0 = spec.eta0;
  c.step.t0 = spec.t0;
  c.batch_size = spec.batch_size;
  if (spec.method == "subgrad") {
    c.method = BaselineMethod::subgrad;
  } else if (spec.method == "sgd" || spec.method == "ssgd-mb") {
    c.method = BaselineMethod::sgd;
    if (spec.method == "sgd") c.batch_size = 1;
    c.batch_size = std::min(c.batch_size, n);
    if (spec.epochs > 0) c.max_iters = spec.epochs * static_cast<int>(n / c.batch_size);
  } else if (spec.method == "cg") {
    c.method = BaselineMethod::cg;
  } else if (spec.method == "cg-l2") {
    c.method = BaselineMethod::cg_l2;
  } else {
    throw std::invalid_argument("'" + spec.method + "' is not a baseline method");
  }
  return c;
}

MethodSpec method_from_json(const json& j, MethodSpec s) {
  s.method = j.value("method", s.method);
  s.lambda = j.value("lambda", s.lambda);
  s.mu = j.value("mu", s.mu);
  s.eps0 = j.value("eps0", s.eps0);
  s.eps_min = j.value("eps_min", s.eps_min);
  s.beta = j.value("beta", s.beta);
  s.c1 = j.value("c1", s.c1);
  s.kkt_tol = j.value("kkt_tol", s.kkt_tol);
  s.max_outer_iters = j.value("max_outer_iters", s.max_outer_iters);
  s.max_iters = j.value("max_iters", s.max_iters);
  s.epochs = j.value("epochs", s.epochs);
  s.batch_size = j.value("batch_size", s.batch_size);
  s.eta0 = j.value("eta0", s.eta0);
  s.t0 = j.value("t0", s.t0);
  s.seed = j.value("seed", s.seed);
  return s;
}

json to_json(const MethodSpec& s) {
  return json{{"method", s.method},     {"lambda", s.lambda},
              {"mu", s.mu},             {"eps0", s.eps0},
              {"eps_min", s.eps_min},   {"beta", s.beta},
              {"c1", s.c1},             {"kkt_tol", s.kkt_tol},
              {"max_outer_iters", s.max_outer_iters},
              {"max_iters", s.max_iters}, {"epochs", s.epochs},
              {"batch_size", s.batch_size}, {"eta0", s.eta0},
              {"t0", s.t0},             {"seed", s.seed}};
}

Trained run_method(const Dataset& train, const MethodSpec& spec) {
  validate(spec);
  if (is_smsvm(spec.method)) {
    SolveResult r = svm_smooth(train, to_hyperparams(spec));
    return {std::move(r.w), std::move(r.report)};
  }
  const BaselineConfig config = to_baseline_config(spec, train.n());
  BaselineResult r;
  switch (config.method) {
    case BaselineMethod::subgrad: r = subgradient_descent(train, config); break;
    case BaselineMethod::sgd: r = sgd(train, config); break;
    case BaselineMethod::cg:
    case BaselineMethod::cg_l2: r = cg_polak_ribiere_plus(train, config); break;
  }
  return {std::move(r.w), std::move(r.report)};
}

std::vector<int> predict(const Vector& w, const Dataset& data) {
  if (w.size() != data.m()) throw std::invalid_argument("model and data dimensions differ");
  const Vector scores = data.features() * w;
  std::vector<int> out(static_cast<std::size_t>(data.n()));
  for (Index i = 0; i < data.n(); ++i) out[static_cast<std::size_t>(i)] = scores[i] >= 0.0 ? 1 : -1;
  return out;
}

double accuracy(const Vector& w, const Dataset& data) {
  const std::vector<int> pred = predict(w, data);
  Index correct = 0;
  for (Index i = 0; i < data.n(); ++i) {
    if (pred[static_cast<std::size_t>(i)] == static_cast<int>(data.labels()[i])) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(data.n());
}

std::string format_accuracy(double acc) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << acc;
  return out.str();
}

json to_json(const Model& model) {
  return json{{"format", "smsvm-model"},
              {"version", kModelVersion},
              {"method", model.spec.method},
              {"hyperparams", to_json(model.spec)},
              {"dim", model.dim},
              {"bias", model.bias},
              {"labels",
               {{"negative", model.labels.negative},
                {"positive", model.labels.positive},
                {"description", model.labels.description}}},
              {"weights", std::vector<double>(model.w.data(), model.w.data() + model.w.size())}};
}

Model model_from_json(const json& j) {
  if (j.value("format", "") != "smsvm-model") throw std::invalid_argument("not an smsvm model file");
  if (j.value("version", 0) != kModelVersion) {
    throw std::invalid_argument("unsupported model version " + std::to_string(j.value("version", 0)));
  }
  Model m;
  m.spec = method_from_json(j.at("hyperparams"));
  m.dim = j.at("dim").get<Index>();
  m.bias = j.at("bias").get<bool>();
  const auto& labels = j.at("labels");
  m.labels.negative = labels.at("negative").get<double>();
  m.labels.positive = labels.at("positive").get<double>();
  m.labels.description = labels.value("description", "");
  const auto weights = j.at("weights").get<std::vector<double>>();
  m.w = Eigen::Map<const Vector>(weights.data(), static_cast<Index>(weights.size()));
  if (m.w.size() != m.dim + (m.bias ? 1 : 0)) throw std::invalid_argument("model weight count does not match dim");
  return m;
}

json report_to_json(const SolveReport& r, const std::string& method) {
  return json{{"schema", "smsvm-report"},
              {"version", kReportVersion},
              {"method", method},
              {"grad_evals", r.grad_evals},
              {"hess_evals", r.hess_evals},
              {"obj_evals", r.obj_evals},
              {"data_passes", r.data_passes},
              {"wall_time", r.wall_time},
              {"final_kkt", r.final_kkt},
              {"final_nnz", r.final_nnz},
              {"final_eps", r.final_eps},
              {"iterations", r.iterations},
              {"status", r.status},
              {"objective_trace", r.objective_trace}};
}

Dataset align_to_model(const Dataset& data, const Model& model, bool allow_dim_mismatch) {
  Dataset aligned = data;
  if (data.m() > model.dim) {
    if (!allow_dim_mismatch) {
      throw std::invalid_argument("data has feature dimension " + std::to_string(data.m()) +
                                  " but the model was trained on " + std::to_string(model.dim));
    }
    aligned = data.with_dimension(model.dim);
  } else if (data.m() < model.dim) {
    aligned = data.with_dimension(model.dim);
  }
  return model.bias ? aligned.with_bias_feature() : aligned;
}

// Benchmark harness.

namespace {

struct DatasetEntry {
  std::string name;
  json spec;
  std::optional<Dataset> loaded;
  std::string load_error;
};

struct Unit {
  std::size_t dataset;
  int rep;
};

std::vector<BenchRow> run_unit(const DatasetEntry& entry, std::size_t dataset_index, int rep,
                               const json& config, const BenchOptions& options) {
  const auto base_seed = config.value("seed", std::uint64_t{0});
  const double test_fraction = config.value("test_fraction", 0.2);
  const json& methods = config.at("methods");

  std::optional<Dataset> train;
  std::optional<Dataset> test;
  std::string failure = entry.load_error;
  if (failure.empty()) {
    try {
      const std::uint64_t seed = mix_seed(base_seed, dataset_index, static_cast<std::uint64_t>(rep));
      if (entry.spec.contains("synthetic")) {
        const json& s = entry.spec.at("synthetic");
        SyntheticSpec spec;
        spec.n = s.at("n").get<Index>();
        spec.m = s.at("m").get<Index>();
        spec.centroid_scale = s.value("centroid_scale", 1.0);
        spec.sparsity = s.value("sparsity", 0.0);
        spec.n_test = s.value("n_test", Index{0});
        spec.seed = seed;
        SyntheticData generated = generate_synthetic(spec);
        if (generated.test) {
          train = std::move(generated.train);
          test = std::move(generated.test);
        } else {
          Split split = train_test_split(generated.train, test_fraction, seed ^ 0x5bd1e995ULL);
          train = std::move(split.train);
          test = std::move(split.test);
        }
      } else {
        Dataset data = *entry.loaded;
        if (const auto sub = entry.spec.value("subsample", Index{0}); sub > 0 && sub < data.n()) {
          std::vector<Index> rows(static_cast<std::size_t>(data.n()));
          std::iota(rows.begin(), rows.end(), Index{0});
          std::mt19937_64 rng(seed);
          std::shuffle(rows.begin(), rows.end(), rng);
          rows.resize(static_cast<std::size_t>(sub));
          std::sort(rows.begin(), rows.end());
          data = data.subset(rows);
        }
        Split split = train_test_split(data, test_fraction, seed);
        train = std::move(split.train);
        test = std::move(split.test);
      }
      if (entry.spec.value("bias", false)) {
        train = train->with_bias_feature();
        test = test->with_bias_feature();
      }
    } catch (const std::exception& e) {
      failure = e.what();
    }
  }

  std::vector<BenchRow> rows;
  for (std::size_t k = 0; k < methods.size(); ++k) {
    const json& m = methods[k];
    MethodSpec spec = method_from_json(m);
    if (m.contains("overrides") && m["overrides"].contains(entry.name)) {
      spec = method_from_json(m["overrides"][entry.name], spec);
    }
    spec.seed = mix_seed(base_seed ^ spec.seed, k, static_cast<std::uint64_t>(rep));
    BenchRow row;
    if (failure.empty()) {
      try {
        Trained t = run_method(*train, spec);
        row = row_from_report(t.report);
        row.acc = accuracy(t.w, *test);
        if (!options.record_time) row.time_s = 0.0;
        row.status = t.report.status;
      } catch (const std::exception& e) {
        row = BenchRow{};
        row.status = std::string("error: ") + e.what();
      }
    } else {
      row.status = "error: " + failure;
    }
    row.method = m.value("label", spec.method);
    row.dataset = entry.name;
    row.rep = std::to_string(rep);
    rows.push_back(std::move(row));
  }
  return rows;
}

bool row_ok(const BenchRow& r) { return r.status.rfind("error", 0) != 0; }

}  // namespace

BenchResult run_bench(const json& config, const BenchOptions& options) {
  const int reps = config.value("repetitions", 1);
  if (reps < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (!config.contains("datasets") || !config.contains("methods")) {
    throw std::invalid_argument("bench config needs 'datasets' and 'methods'");
  }
  for (const auto& m : config.at("methods")) {
    MethodSpec spec = method_from_json(m);
    validate(spec);
  }

  std::vector<DatasetEntry> datasets;
  for (const auto& d : config.at("datasets")) {
    DatasetEntry entry{d.at("name").get<std::string>(), d, std::nullopt, {}};
    if (!d.contains("synthetic")) {
      std::filesystem::path path = d.at("path").get<std::string>();
      if (path.is_relative()) path = options.base_dir / path;
      ParseOptions parse;
      if (d.contains("positive_label")) parse.positive_label = d["positive_label"].get<double>();
      try {
        entry.loaded = read_libsvm(path, parse).data;
      } catch (const std::exception& e) {
        entry.load_error = e.what();
      }
    }
    datasets.push_back(std::move(entry));
  }

  std::vector<Unit> units;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    for (int r = 0; r < reps; ++r) units.push_back({d, r});
  }
  std::vector<std::vector<BenchRow>> results(units.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t u = next++; u < units.size(); u = next++) {
      results[u] = run_unit(datasets[units[u].dataset], units[u].dataset, units[u].rep, config, options);
    }
  };
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(units.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Config order: dataset, then method, then repetition.
  BenchResult out;
  const std::size_t n_methods = config.at("methods").size();
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    for (std::size_t k = 0; k < n_methods; ++k) {
      std::vector<const BenchRow*> group;
      for (std::size_t u = 0; u < units.size(); ++u) {
        if (units[u].dataset == d) group.push_back(&results[u][k]);
      }
      BenchRow mean;
      mean.method = group.front()->method;
      mean.dataset = group.front()->dataset;
      mean.rep = "mean";
      int ok = 0;
      for (const BenchRow* r : group) {
        out.rows.push_back(*r);
        if (!row_ok(*r)) continue;
        ++ok;
        mean.acc += r->acc;
        mean.time_s += r->time_s;
        mean.grad_evals += r->grad_evals;
        mean.hess_evals += r->hess_evals;
        mean.obj_evals += r->obj_evals;
        mean.data_passes += r->data_passes;
        mean.nnz += r->nnz;
      }
      if (ok > 0) {
        const double inv = 1.0 / ok;
        mean.acc *= inv;
        mean.time_s *= inv;
        mean.grad_evals *= inv;
        mean.hess_evals *= inv;
        mean.obj_evals *= inv;
        mean.data_passes *= inv;
        mean.nnz *= inv;
      }
      mean.status = ok == static_cast<int>(group.size())
                        ? "ok"
                        : std::to_string(ok) + "/" + std::to_string(group.size()) + " ok";
      out.aggregates.push_back(std::move(mean));
    }
  }
  return out;
}

void write_bench_csv(std::ostream& out, const BenchResult& result, bool include_aggregates) {
  out << "method,dataset,rep,acc,time_s,grad_evals,hess_evals,obj_evals,data_passes,nnz,status\n";
  auto write = [&](const BenchRow& r) {
    out << csv_field(r.method) << ',' << csv_field(r.dataset) << ',' << r.rep << ','
        << format_accuracy(r.acc) << ',' << format_number(r.time_s) << ','
        << format_number(r.grad_evals) << ',' << format_number(r.hess_evals) << ','
        << format_number(r.obj_evals) << ',' << format_number(r.data_passes) << ','
        << format_number(r.nnz) << ',' << csv_field(r.status) << '\n';
  };
  for (const auto& r : result.rows) write(r);
  if (include_aggregates) {
    for (const auto& r : result.aggregates) write(r);
  }
}

json bench_to_json(const BenchResult& result, const json& config) {
  auto row_json = [](const BenchRow& r) {
    return json{{"method", r.method},         {"dataset", r.dataset},
                {"rep", r.rep},               {"acc", r.acc},
                {"time_s", r.time_s},         {"grad_evals", r.grad_evals},
                {"hess_evals", r.hess_evals}, {"obj_evals", r.obj_evals},
                {"data_passes", r.data_passes}, {"nnz", r.nnz},
                {"status", r.status}};
  };
  json rows = json::array();
  for (const auto& r : result.rows) rows.push_back(row_json(r));
  json aggregates = json::array();
  for (const auto& r : result.aggregates) aggregates.push_back(row_json(r));
  return json{{"schema", "smsvm-bench"},
              {"version", kBenchVersion},
              {"config", config},
              {"rows", rows},
              {"aggregates", aggregates}};
}

void write_bench_table(std::ostream& out, const BenchResult& result) {
  std::vector<std::string> datasets;
  std::vector<std::string> methods;
  std::map<std::pair<std::string, std::string>, const BenchRow*> cell;
  for (const auto& r : result.aggregates) {
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    cell[{r.method, r.dataset}] = &r;
  }
  out << std::left << std::setw(16) << "Algorithm";
  for (const auto& d : datasets) out << " | " << std::setw(20) << d;
  out << '\n' << std::setw(16) << "";
  for (std::size_t i = 0; i < datasets.size(); ++i) out << " | " << std::setw(8) << "Acc." << std::setw(12) << "Time (s)";
  out << '\n';
  for (const auto& m : methods) {
    out << std::setw(16) << m;
    for (const auto& d : datasets) {
      const BenchRow* r = cell[{m, d}];
      // An aggregate with no successful repetition has nothing to average.
      if (r && r->status.rfind("0/", 0) == 0) r = nullptr;
      std::ostringstream time;
      if (r) time << std::fixed << std::setprecision(3) << r->time_s;
      out << " | " << std::setw(8) << (r ? format_accuracy(r->acc) : "n/a") << std::setw(12)
          << (r ? time.str() : "n/a");
    }
    out << '\n';
  }
}

std::vector<std::pair<double, double>> smooth_curve(Index n, std::uint64_t seed, double eps,
                                                    double w_min, double w_max, int points) {
  if (points < 2) throw std::invalid_argument("need at least 2 grid points");
  if (!(eps >= 0.0)) throw std::invalid_argument("eps must be >= 0");
  const Dataset data = generate_interval_data(n, seed);
  std::vector<std::pair<double, double>> curve;
  curve.reserve(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double w = w_min + (w_max - w_min) * k / (points - 1);
    double sum = 0.0;
    for (Index i = 0; i < data.n(); ++i) {
      const double x = data.features().coeff(i, 0);
      sum += smoothed_hinge(1.0 - data.labels()[i] * x * w, eps);
    }
    curve.emplace_back(w, sum / static_cast<double>(data.n()));
  }
  return curve;
}

}  // namespace smsvm::cli
