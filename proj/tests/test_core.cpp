#include "smsvm/core.hpp"

#include <doctest.h>

using namespace smsvm;

TEST_CASE("dataset stores sparse rows and labels") {
  Dataset d({{{0, 2}, {0.5, 2.0}}, {{}, {}}}, {1.0, -1.0}, 3);
  CHECK(d.n() == 2);
  CHECK(d.m() == 3);
  CHECK(d.features().coeff(0, 0) == 0.5);
  CHECK(d.features().coeff(0, 2) == 2.0);
  CHECK(d.features().coeff(1, 1) == 0.0);
  CHECK(d.labels()[1] == -1.0);
}

TEST_CASE("dataset rejects invalid input") {
  CHECK_THROWS_AS(Dataset({{{0}, {1.0}}}, {0.5}, 1), std::invalid_argument);
  CHECK_THROWS_AS(Dataset({{{0, 0}, {1.0, 2.0}}}, {1.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(Dataset({{{3}, {1.0}}}, {1.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(Dataset({{{0}, {1.0}}}, {1.0, -1.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(Dataset({}, {}, 1), std::invalid_argument);
  CHECK_THROWS_AS(Dataset({{{0}, {1.0}}}, {1.0}, 0), std::invalid_argument);
}

TEST_CASE("subset, dimension change and bias column") {
  Dataset d({{{0}, {1.0}}, {{1}, {2.0}}, {{0, 1}, {3.0, 4.0}}}, {1.0, -1.0, 1.0}, 2);
  const std::vector<Index> rows = {2, 0};
  const Dataset s = d.subset(rows);
  CHECK(s.n() == 2);
  CHECK(s.features().coeff(0, 1) == 4.0);
  CHECK(s.labels()[1] == 1.0);

  const Dataset narrow = d.with_dimension(1);
  CHECK(narrow.m() == 1);
  CHECK(narrow.features().nonZeros() == 2);
  CHECK(d.with_dimension(4).m() == 4);

  const Dataset biased = d.with_bias_feature();
  CHECK(biased.m() == 3);
  for (Index i = 0; i < biased.n(); ++i) CHECK(biased.features().coeff(i, 2) == 1.0);

  CHECK(d == d.subset(std::vector<Index>{0, 1, 2}));
  CHECK_FALSE(d == s);
}

TEST_CASE("hyperparameter validation") {
  HyperParams p;
  CHECK_NOTHROW(validate(p));
  p.mu = -1.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = {};
  p.beta = 1.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = {};
  p.eps0 = 1e-4;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = {};
  p.c1 = 1.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("pass counters") {
  SolveReport r;
  count_data_pass(r, PassKind::gradient);
  count_data_pass(r, PassKind::hessian);
  count_data_pass(r, PassKind::objective);
  CHECK(r.grad_evals == 1);
  CHECK(r.hess_evals == 1);
  CHECK(r.obj_evals == 1);
  CHECK(r.data_passes == 3.0);
  for (int k = 0; k < 4; ++k) count_partial_pass(r, PassKind::gradient, 25, 100);
  CHECK(r.grad_evals == 5);
  CHECK(r.data_passes == doctest::Approx(4.0));
}

TEST_CASE("nonzero count and sign") {
  Vector w(4);
  w << 0.0, -0.0, 1e-300, -2.0;
  CHECK(count_nonzeros(w) == 2);
  CHECK(sign(-3.0) == -1.0);
  CHECK(sign(0.0) == 0.0);
  CHECK(sign(5.0) == 1.0);
}
