#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "addgp/linalg.hpp"

namespace addgp {

struct Dataset {
  Matrix features;  // n x p
  std::vector<int> labels;
  std::vector<std::string> feature_names;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }
  Dataset subset(std::span<const std::size_t> rows) const;
};

struct LoadOptions {
  /// Header name or zero-based column index; empty selects the last column.
  std::string label_column;
  /// Raw label cell -> class. Keys that parse as numbers also match numerically
  /// equal cells ("1.0" matches "1").
  std::map<std::string, int> label_mapping{{"-1", 0}, {"1", 1}};
  /// Columns removed before the remaining ones become features.
  std::vector<std::string> drop_columns;
};

/// Reads a headered comma-separated file. Features are every remaining column
/// in file order.
Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});

/// Same parser over in-memory text; `source` names the input in messages.
Dataset parse_dataset(const std::string& text, const LoadOptions& options = {},
                      const std::string& source = "<memory>");

struct StreamSplit {
  Dataset initial;
  std::vector<Dataset> batches;
  Dataset test;

  std::size_t stream_rows() const;
  std::size_t training_rows() const { return initial.size() + stream_rows(); }
};

struct BatchRange {
  std::size_t min = 50;
  std::size_t max = 100;
};

/// Shuffles rows, takes test_fraction of them as the test set, then
/// initial_fraction of the remainder as the initial window, and chops the rest
/// into consecutive batches with sizes uniform in [min, max] (the last batch
/// may be smaller).
StreamSplit split_stream(const Dataset& d, double test_fraction, double initial_fraction,
                         BatchRange batch_range, std::mt19937_64& rng);

/// Additive ground truth: x_j ~ U(-2, 2), logit = sum_j g_j(x_j) with the
/// signal concentrated in the leading features; labels are Bernoulli draws.
Dataset make_synthetic(std::size_t n, std::size_t p, std::uint64_t seed);

/// Column z-scoring with statistics from a reference matrix only.
class Standardizer {
 public:
  explicit Standardizer(const Matrix& reference);
  void apply(Matrix& m) const;

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

/// floor(fraction * n) robust to representation error (0.2 * 75 -> 15).
std::size_t fraction_floor(double fraction, std::size_t n);
/// ceil(fraction * n) robust to representation error.
std::size_t fraction_ceil(double fraction, std::size_t n);

}  // namespace addgp
