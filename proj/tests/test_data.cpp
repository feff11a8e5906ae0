#include "smsvm/data.hpp"

#include <doctest.h>

#include <zlib.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace smsvm;

namespace {

ParsedData parse(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in);
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parse examples") {
  const ParsedData one = parse("+1 1:0.5 3:2\n");
  CHECK(one.data.n() == 1);
  CHECK(one.data.m() == 3);
  CHECK(one.data.labels()[0] == 1.0);
  CHECK(one.data.features().coeff(0, 0) == 0.5);
  CHECK(one.data.features().coeff(0, 2) == 2.0);
  CHECK(one.data.features().nonZeros() == 2);

  const ParsedData empty = parse("-1\n");
  CHECK(empty.data.n() == 1);
  CHECK(empty.data.features().nonZeros() == 0);
  CHECK(empty.data.labels()[0] == -1.0);

  const std::string err = parse_error("+1 2:x\n");
  CHECK(err.find("line 1") != std::string::npos);
}

TEST_CASE("parse errors carry line numbers") {
  CHECK(parse_error("+1 1:1\n-1 2:1 2:3\n").find("line 2") != std::string::npos);
  CHECK(parse_error("+1 1:1\n-1 1:1\n2 1:1\n").find("line 3") != std::string::npos);
  CHECK(parse_error("+1 0:1\n").find("line 1") != std::string::npos);
  CHECK(parse_error("abc 1:1\n").find("line 1") != std::string::npos);
  CHECK(parse_error("+1 1\n").find("line 1") != std::string::npos);
  CHECK_FALSE(parse_error("").empty());
}

TEST_CASE("comments, blank lines and label conventions") {
  const ParsedData d = parse("# header\n\n1 1:1 # trailing\n0 2:1\n");
  CHECK(d.data.n() == 2);
  CHECK(d.data.labels()[0] == 1.0);
  CHECK(d.data.labels()[1] == -1.0);
  CHECK(d.labels.negative == 0.0);

  const ParsedData other = parse("2 1:1\n7 1:2\n");
  CHECK(other.data.labels()[0] == -1.0);
  CHECK(other.data.labels()[1] == 1.0);
  CHECK(other.labels.positive == 7.0);
  CHECK_FALSE(other.labels.description.empty());

  std::istringstream multi("1 1:1\n2 1:2\n3 1:3\n2 1:4\n");
  ParseOptions one_vs_rest;
  one_vs_rest.positive_label = 2.0;
  const ParsedData ovr = parse_libsvm(multi, one_vs_rest);
  CHECK(ovr.data.labels() == Vector{{-1.0, 1.0, -1.0, 1.0}});

  std::istringstream in("+1 1:1\n");
  CHECK(parse_libsvm(in, {Index{5}}).data.m() == 5);
  std::istringstream too_small("+1 4:1\n");
  CHECK_THROWS_AS(parse_libsvm(too_small, {Index{2}}), ParseError);
}

TEST_CASE("write then parse round-trips exactly") {
  SyntheticSpec spec;
  spec.n = 20;
  spec.m = 7;
  spec.seed = 3;
  const Dataset original = generate_synthetic(spec).train;
  std::stringstream buffer;
  write_libsvm(buffer, original);
  const ParsedData back = parse_libsvm(buffer);
  CHECK(back.data == original);
}

TEST_CASE("gzip input") {
  const auto path = std::filesystem::temp_directory_path() / "smsvm_test_input.svm.gz";
  gzFile f = gzopen(path.string().c_str(), "wb");
  REQUIRE(f);
  const std::string text = "+1 1:1.5\n-1 2:-2\n";
  gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
  gzclose(f);
  const ParsedData d = read_libsvm(path);
  CHECK(d.data.n() == 2);
  CHECK(d.data.features().coeff(1, 1) == -2.0);
  std::filesystem::remove(path);
  CHECK_THROWS(read_libsvm("/nonexistent/file.svm"));
}

TEST_CASE("synthetic generator") {
  SyntheticSpec spec;
  spec.n = 50;
  spec.m = 2500;
  spec.seed = 8;
  const SyntheticData a = generate_synthetic(spec);
  CHECK(a.train.n() == 50);
  CHECK(a.train.m() == 2500);
  CHECK((a.centroid_pos.array() != 0.0).all());
  CHECK((a.centroid_neg.array() != 0.0).all());
  CHECK(a.train == generate_synthetic(spec).train);
  CHECK(a.train.labels().head(25).isConstant(1.0));
  CHECK(a.train.labels().tail(25).isConstant(-1.0));

  spec.sparsity = 0.4;
  const SyntheticData sparse = generate_synthetic(spec);
  CHECK((sparse.centroid_pos.array() == 0.0).count() == 1000);
  CHECK((sparse.centroid_neg.array() == 0.0).count() == 1000);

  spec.n_test = 30;
  const SyntheticData with_test = generate_synthetic(spec);
  REQUIRE(with_test.test);
  CHECK(with_test.test->n() == 30);

  spec.sparsity = 1.0;
  CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);
}

TEST_CASE("interval data") {
  const Dataset d = generate_interval_data(200, 1);
  CHECK(d.n() == 200);
  for (Index i = 0; i < d.n(); ++i) {
    const double x = d.features().coeff(i, 0);
    if (d.labels()[i] > 0) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    } else {
      CHECK(x <= 0.0);
      CHECK(x >= -1.0);
    }
  }
}

TEST_CASE("stratified split") {
  std::vector<SparseRow> rows(10);
  std::vector<double> labels(10);
  for (int i = 0; i < 10; ++i) {
    rows[static_cast<std::size_t>(i)] = {{0}, {static_cast<double>(i + 1)}};
    labels[static_cast<std::size_t>(i)] = i < 5 ? 1.0 : -1.0;
  }
  const Dataset d(rows, labels, 1);
  const Split s = train_test_split(d, 0.2, 4);
  CHECK(s.train.n() == 8);
  CHECK(s.test.n() == 2);
  CHECK((s.test.labels().array() > 0).count() == 1);

  std::vector<Index> all = s.train_rows;
  all.insert(all.end(), s.test_rows.begin(), s.test_rows.end());
  std::sort(all.begin(), all.end());
  for (Index i = 0; i < 10; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);

  const Split again = train_test_split(d, 0.2, 4);
  CHECK(again.test_rows == s.test_rows);

  const Dataset four({{{0}, {1.0}}, {{0}, {2.0}}, {{0}, {3.0}}, {{0}, {4.0}}}, {1.0, 1.0, -1.0, -1.0}, 1);
  const Split half = train_test_split(four, 0.5, 1);
  CHECK(half.train.n() == 2);
  CHECK(half.train.labels().sum() == 0.0);
  CHECK(half.test.labels().sum() == 0.0);

  const Dataset lonely({{{0}, {1.0}}, {{0}, {2.0}}, {{0}, {3.0}}}, {1.0, -1.0, -1.0}, 1);
  CHECK_THROWS_AS(train_test_split(lonely, 0.3, 1), std::invalid_argument);
  CHECK_THROWS_AS(train_test_split(d, 1.0, 1), std::invalid_argument);
}
