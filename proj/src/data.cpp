#include "smsvm/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace smsvm {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_index(std::string_view token, long long& out) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string read_gzip(const std::filesystem::path& path) {
  gzFile file = gzopen(path.string().c_str(), "rb");
  if (!file) throw std::runtime_error("cannot open " + path.string());
  std::string out;
  char buffer[1 << 16];
  int got = 0;
  while ((got = gzread(file, buffer, sizeof buffer)) > 0) out.append(buffer, static_cast<std::size_t>(got));
  const bool failed = got < 0;
  gzclose(file);
  if (failed) throw std::runtime_error("gzip read error in " + path.string());
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

ParsedData parse_libsvm(std::istream& in, const ParseOptions& options) {
  std::vector<SparseRow> rows;
  std::vector<double> raw_labels;
  std::vector<double> classes;
  Index max_index = -1;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;

    double label = 0.0;
    if (!parse_double(token, label)) throw ParseError(line_no, "malformed label '" + token + "'");
    if (std::find(classes.begin(), classes.end(), label) == classes.end()) {
      if (classes.size() == 2 && !options.positive_label) {
        throw ParseError(line_no, "label '" + token + "' is a third class");
      }
      classes.push_back(label);
    }

    SparseRow row;
    std::set<long long> seen;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) throw ParseError(line_no, "expected index:value, got '" + token + "'");
      long long index = 0;
      double value = 0.0;
      if (!parse_index(std::string_view(token).substr(0, colon), index) || index < 1) {
        throw ParseError(line_no, "malformed feature index in '" + token + "'");
      }
      if (!parse_double(std::string_view(token).substr(colon + 1), value)) {
        throw ParseError(line_no, "malformed feature value in '" + token + "'");
      }
      if (!seen.insert(index).second) {
        throw ParseError(line_no, "duplicate feature index " + std::to_string(index));
      }
      row.indices.push_back(static_cast<Index>(index - 1));
      row.values.push_back(value);
      max_index = std::max(max_index, static_cast<Index>(index - 1));
    }
    rows.push_back(std::move(row));
    raw_labels.push_back(label);
  }
  if (rows.empty()) throw ParseError(line_no, "no samples");

  Index dim = max_index + 1;
  if (options.dim) {
    if (*options.dim <= max_index) {
      throw ParseError(line_no, "feature index " + std::to_string(max_index + 1) +
                                    " exceeds requested dimension " + std::to_string(*options.dim));
    }
    dim = *options.dim;
  }
  dim = std::max<Index>(dim, 1);

  LabelMapping mapping;
  std::sort(classes.begin(), classes.end());
  auto has = [&](double v) { return std::find(classes.begin(), classes.end(), v) != classes.end(); };
  if (options.positive_label) {
    mapping.positive = *options.positive_label;
    mapping.description = "label " + format_double(mapping.positive) + " mapped to +1, all others to -1";
  } else if (classes.size() == 2) {
    if (has(-1.0) && has(1.0)) {
      mapping.description = "labels -1/+1 used as given";
    } else if (has(0.0) && has(1.0)) {
      mapping.negative = 0.0;
      mapping.description = "labels 0/1 mapped to -1/+1";
    } else {
      mapping.negative = classes[0];
      mapping.positive = classes[1];
      mapping.description = "labels " + format_double(classes[0]) + "/" + format_double(classes[1]) +
                            " mapped to -1/+1";
    }
  } else if (classes[0] == 1.0 || classes[0] == -1.0) {
    mapping.description = "single class, used as given";
  } else if (classes[0] == 0.0) {
    mapping.negative = 0.0;
    mapping.description = "single class 0 mapped to -1";
  } else {
    mapping.positive = classes[0];
    mapping.description = "single class " + format_double(classes[0]) + " mapped to +1";
  }

  std::vector<double> labels(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    labels[i] = raw_labels[i] == mapping.positive ? 1.0 : -1.0;
  }
  return {Dataset(std::move(rows), std::move(labels), dim), mapping};
}

ParsedData read_libsvm(const std::filesystem::path& path, const ParseOptions& options) {
  if (path.extension() == ".gz") {
    std::istringstream in(read_gzip(path));
    return parse_libsvm(in, options);
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_libsvm(in, options);
}

void write_libsvm(std::ostream& out, const Dataset& data) {
  for (Index i = 0; i < data.n(); ++i) {
    out << (data.labels()[i] > 0 ? "+1" : "-1");
    for (SparseRowMatrix::InnerIterator it(data.features(), i); it; ++it) {
      out << ' ' << (it.col() + 1) << ':' << format_double(it.value());
    }
    out << '\n';
  }
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 2) throw std::invalid_argument("synthetic data needs n >= 2");
  if (spec.m < 1) throw std::invalid_argument("synthetic data needs m >= 1");
  if (!(spec.sparsity >= 0.0 && spec.sparsity < 1.0)) throw std::invalid_argument("sparsity must lie in [0,1)");
  if (spec.n_test < 0) throw std::invalid_argument("n_test must be >= 0");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto zeroed = static_cast<Index>(std::floor(spec.sparsity * static_cast<double>(spec.m)));

  auto centroid = [&] {
    Vector c(spec.m);
    for (Index j = 0; j < spec.m; ++j) c[j] = spec.centroid_scale * normal(rng);
    std::vector<Index> idx(static_cast<std::size_t>(spec.m));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    for (Index k = 0; k < zeroed; ++k) c[idx[static_cast<std::size_t>(k)]] = 0.0;
    return c;
  };
  const Vector centroid_pos = centroid();
  const Vector centroid_neg = centroid();

  auto sample = [&](Index count) {
    const Index positives = count - count / 2;
    std::vector<SparseRow> rows(static_cast<std::size_t>(count));
    std::vector<double> labels(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) {
      const bool pos = i < positives;
      const Vector& c = pos ? centroid_pos : centroid_neg;
      auto& row = rows[static_cast<std::size_t>(i)];
      row.indices.resize(static_cast<std::size_t>(spec.m));
      row.values.resize(static_cast<std::size_t>(spec.m));
      for (Index j = 0; j < spec.m; ++j) {
        row.indices[static_cast<std::size_t>(j)] = j;
        row.values[static_cast<std::size_t>(j)] = c[j] + normal(rng);
      }
      labels[static_cast<std::size_t>(i)] = pos ? 1.0 : -1.0;
    }
    return Dataset(std::move(rows), std::move(labels), spec.m);
  };
  Dataset train = sample(spec.n);
  std::optional<Dataset> test;
  if (spec.n_test > 0) test = sample(spec.n_test);
  return {std::move(train), std::move(test), centroid_pos, centroid_neg};
}

Dataset generate_interval_data(Index n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("need n >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<SparseRow> rows(static_cast<std::size_t>(n));
  std::vector<double> labels(static_cast<std::size_t>(n));
  const Index positives = n - n / 2;
  for (Index i = 0; i < n; ++i) {
    const bool pos = i < positives;
    const double x = pos ? unit(rng) : -unit(rng);
    rows[static_cast<std::size_t>(i)] = SparseRow{{0}, {x}};
    labels[static_cast<std::size_t>(i)] = pos ? 1.0 : -1.0;
  }
  return Dataset(std::move(rows), std::move(labels), 1);
}

Split train_test_split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must lie in (0,1)");
  }
  std::vector<Index> by_class[2];
  for (Index i = 0; i < data.n(); ++i) by_class[data.labels()[i] > 0 ? 1 : 0].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
  for (auto& members : by_class) {
    const auto count = static_cast<Index>(members.size());
    if (count < 2) throw std::invalid_argument("each class needs at least 2 samples to split");
    auto take = static_cast<Index>(std::llround(test_fraction * static_cast<double>(count)));
    take = std::clamp<Index>(take, 1, count - 1);
    std::shuffle(members.begin(), members.end(), rng);
    test_rows.insert(test_rows.end(), members.begin(), members.begin() + take);
    train_rows.insert(train_rows.end(), members.begin() + take, members.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  Dataset train = data.subset(train_rows);
  Dataset test = data.subset(test_rows);
  return {std::move(train), std::move(test), std::move(train_rows), std::move(test_rows)};
}

}  // namespace smsvm
