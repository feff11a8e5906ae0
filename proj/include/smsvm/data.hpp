#pragma once

#include "smsvm/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace smsvm {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// How file labels were mapped onto {-1,+1}.
struct LabelMapping {
  double negative = -1.0;  // file value mapped to -1
  double positive = 1.0;   // file value mapped to +1
  std::string description;
};

struct ParsedData {
  Dataset data;
  LabelMapping labels;
};

struct ParseOptions {
  /// Feature dimension; inferred as max index + 1 when unset.
  std::optional<Index> dim;
  /// One-vs-rest reading: this label maps to +1 and every other label to -1,
  /// lifting the two-class limit.
  std::optional<double> positive_label;
};

/// libSVM sparse text: `label (index:value)*` per line, 1-based indices.
/// Blank lines and `#` comments are skipped. At most two distinct labels;
/// {-1,+1} maps to itself, {0,1} maps 0 to -1, any other pair maps the smaller
/// value to -1.
ParsedData parse_libsvm(std::istream& in, const ParseOptions& options = {});
/// Reads a file, decompressing transparently when the name ends in ".gz".
ParsedData read_libsvm(const std::filesystem::path& path, const ParseOptions& options = {});

/// Writes labels as +1/-1 and values in shortest round-trip form.
void write_libsvm(std::ostream& out, const Dataset& data);

struct SyntheticSpec {
  Index n = 100;
  Index m = 10;
  double centroid_scale = 1.0;
  /// Fraction of each centroid's components forced to zero.
  double sparsity = 0.0;
  std::uint64_t seed = 0;
  /// Extra samples drawn from the same centroids, returned separately.
  Index n_test = 0;
};

struct SyntheticData {
  Dataset train;
  std::optional<Dataset> test;
  Vector centroid_pos;
  Vector centroid_neg;
};

/// Two centroids with N(0,1) entries scaled by centroid_scale, a random
/// floor(sparsity m)-subset of each zeroed, then x ~ N(c, I) with the first
/// ceil(n/2) samples labelled +1 and the rest -1.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// One-dimensional set: x ~ U[0,1] for y = +1 and x ~ U[-1,0] for y = -1,
/// half of the samples each.
Dataset generate_interval_data(Index n, std::uint64_t seed);

struct Split {
  Dataset train;
  Dataset test;
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
};

/// Stratified split; each class contributes round(test_fraction * count)
/// samples to the test side, clamped to [1, count - 1]. Rows keep their
/// original order on both sides.
Split train_test_split(const Dataset& data, double test_fraction, std::uint64_t seed);

}  // namespace smsvm
