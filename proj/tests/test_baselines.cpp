#include "oracles.hpp"

#include "smsvm/baselines.hpp"
#include "smsvm/data.hpp"
#include "smsvm/solver.hpp"

#include <doctest.h>

#include <filesystem>

using namespace smsvm;

namespace {

Dataset single(double x, double y) { return Dataset({{{0}, {x}}}, {y}, 1); }

std::filesystem::path data_dir() { return SMSVM_DATA_DIR; }

}  // namespace

TEST_CASE("hinge subgradient examples") {
  CHECK(hinge_subgradient(single(1.0, 1.0), Vector{{2.0}}, 0.0)[0] == 0.0);
  CHECK(hinge_subgradient(single(1.0, 1.0), Vector{{0.0}}, 0.0)[0] == -1.0);
  CHECK(hinge_subgradient(single(1.0, 1.0), Vector{{1.0}}, 0.0)[0] == 0.0);
  CHECK(hinge_subgradient(single(1.0, 1.0), Vector{{1.0}}, 2.0)[0] == 2.0);
  const std::vector<Index> none;
  CHECK_THROWS(hinge_subgradient(single(1.0, 1.0), Vector{{1.0}}, 0.0, std::span<const Index>(none)));

  SolveReport r;
  const Dataset d = oracle::random_dataset(8, 3, 1);
  const std::vector<Index> batch = {1, 5};
  hinge_subgradient(d, Vector::Zero(3), 0.1, std::span<const Index>(batch), &r);
  CHECK(r.grad_evals == 1);
  CHECK(r.data_passes == doctest::Approx(0.25));
}

TEST_CASE("subgradient descent basics") {
  const Dataset d = oracle::random_dataset(40, 4, 2);
  BaselineConfig c;
  c.max_iters = 0;
  c.w0 = Vector{{1.0, 2.0, 3.0, 4.0}};
  CHECK(subgradient_descent(d, c).w == *c.w0);

  c.max_iters = 50;
  c.lambda = 1e3;
  c.step.kind = StepSchedule::Kind::inverse_lambda;
  const BaselineResult r = subgradient_descent(d, c);
  CHECK(r.w.norm() < 0.1 * c.w0->norm());
  CHECK(r.report.grad_evals == 50);
  CHECK(r.report.iterations == 50);
}

TEST_CASE("mini-batch of the whole data set reproduces subgradient descent") {
  const Dataset d = oracle::random_dataset(37, 5, 3);
  BaselineConfig c;
  c.max_iters = 200;
  c.batch_size = d.n();
  c.seed = 9;
  const BaselineResult full = subgradient_descent(d, c);
  const BaselineResult batch = sgd(d, c);
  CHECK(full.w == batch.w);
  CHECK(batch.report.data_passes == doctest::Approx(200.0));
}

TEST_CASE("sgd is reproducible and validates its batch size") {
  const Dataset d = oracle::random_dataset(100, 5, 4);
  BaselineConfig c;
  c.max_iters = 300;
  c.batch_size = 32;
  c.seed = 5;
  const BaselineResult a = sgd(d, c);
  const BaselineResult b = sgd(d, c);
  CHECK(a.w == b.w);
  c.seed = 6;
  CHECK_FALSE(sgd(d, c).w == a.w);
  CHECK(a.report.data_passes == doctest::Approx(300.0 * 32.0 / 100.0));
  c.batch_size = 101;
  CHECK_THROWS_AS(sgd(d, c), std::invalid_argument);
}

TEST_CASE("sgd beats the majority baseline on tall synthetic data") {
  SyntheticSpec spec;
  spec.n = 10000;
  spec.m = 50;
  spec.centroid_scale = 0.3;
  spec.n_test = 4000;
  spec.seed = 21;
  const SyntheticData gen = generate_synthetic(spec);
  BaselineConfig c;
  c.method = BaselineMethod::sgd;
  c.batch_size = 32;
  c.max_iters = 50 * static_cast<int>(spec.n / c.batch_size);
  const BaselineResult r = sgd(gen.train, c);
  const Vector scores = gen.test->features() * r.w;
  Index correct = 0;
  for (Index i = 0; i < gen.test->n(); ++i) {
    if ((scores[i] >= 0.0 ? 1.0 : -1.0) == gen.test->labels()[i]) ++correct;
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(gen.test->n()) > 0.7);
}

TEST_CASE("Polak-Ribiere+ coefficient") {
  const Vector g{{1.0, -2.0}};
  CHECK(polak_ribiere_plus(g, g) == 0.0);
  CHECK(polak_ribiere_plus(Vector{{1.0, 0.0}}, Vector{{0.0, 1.0}}) == 1.0);
  CHECK(polak_ribiere_plus(Vector{{0.0, 1.0}}, Vector{{0.0, 2.0}}) == 0.0);
  CHECK(polak_ribiere_plus(g, Vector::Zero(2)) == 0.0);
}

TEST_CASE("CG first iteration is steepest descent") {
  // f(w) = 1/2 ||w - c||^2: the first step along -g reaches c exactly.
  const Vector c{{1.0, -2.0, 0.5}};
  std::vector<Vector> seen;
  SmoothProblem p{[&](const Vector& w) { return 0.5 * (w - c).squaredNorm(); },
                  [&](const Vector& w) {
                    seen.push_back(w);
                    return Vector(w - c);
                  }};
  const BaselineResult r = cg_polak_ribiere_plus(p, Vector::Zero(3), 1, 1e-4, 40);
  CHECK((r.w - c).norm() <= 1e-15);
}

TEST_CASE("CG solves a quadratic to a direct linear solve") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(5, 5);
  for (Index i = 0; i < 25; ++i) m.data()[i] = normal(rng);
  const Matrix a = m.transpose() * m + 0.5 * Matrix::Identity(5, 5);
  Vector b(5);
  for (Index i = 0; i < 5; ++i) b[i] = normal(rng);
  const Vector exact = a.llt().solve(b);

  SmoothProblem p{[&](const Vector& w) { return 0.5 * w.dot(a * w) - b.dot(w); },
                  [&](const Vector& w) { return Vector(a * w - b); }};
  const BaselineResult r = cg_polak_ribiere_plus(p, Vector::Zero(5), 25, 1e-4, 60, 1e-12);
  CHECK((r.w - exact).norm() <= 1e-8);
  CHECK(r.report.iterations <= 25);
}

TEST_CASE("CG on the hinge objective decreases it") {
  const Dataset d = oracle::random_dataset(80, 5, 12);
  BaselineConfig c;
  c.method = BaselineMethod::cg_l2;
  c.max_iters = 100;
  const BaselineResult r = cg_polak_ribiere_plus(d, c);
  REQUIRE(r.report.objective_trace.size() >= 2);
  CHECK(r.report.objective_trace.back() < r.report.objective_trace.front());
  for (std::size_t k = 1; k < r.report.objective_trace.size(); ++k) {
    CHECK(r.report.objective_trace[k] <= r.report.objective_trace[k - 1]);
  }
  CHECK(objective_hinge(d, r.w, c.lambda) == doctest::Approx(r.report.objective_trace.back()));

  c.method = BaselineMethod::cg;
  const BaselineResult plain = cg_polak_ribiere_plus(d, c);
  CHECK(objective_hinge(d, plain.w, 0.0) < 1.0);
}

TEST_CASE("subgradient descent on Australian approaches the smoothed solution") {
  const ParsedData parsed = read_libsvm(data_dir() / "australian.svm");
  HyperParams p;
  p.lambda = 1e-2;
  p.mu = 0.0;
  const SolveResult smooth = svm_smooth(parsed.data, p);
  const double f_smooth = objective_smooth(parsed.data, smooth.w, p.lambda, smooth.report.final_eps);

  BaselineConfig c;
  c.lambda = 1e-2;
  c.max_iters = 1000;
  const BaselineResult sub = subgradient_descent(parsed.data, c);
  const double f_sub = objective_hinge(parsed.data, sub.w, c.lambda);
  CHECK(std::abs(f_sub - f_smooth) <= 0.05 * f_smooth);
}
