#include "addgp/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include "addgp/error.hpp"

namespace addgp {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') {
    out = out.substr(1, out.size() - 2);
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      cell.push_back(c);
    } else if (c == ',' && !quoted) {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::size_t resolve_label_column(const std::vector<std::string>& header,
                                 const std::string& spec) {
  if (spec.empty()) return header.size() - 1;
  if (auto it = std::find(header.begin(), header.end(), spec); it != header.end()) {
    return static_cast<std::size_t>(it - header.begin());
  }
  std::size_t index = 0;
  const auto [ptr, ec] = std::from_chars(spec.data(), spec.data() + spec.size(), index);
  if (ec == std::errc() && ptr == spec.data() + spec.size() && index < header.size()) {
    return index;
  }
  throw Error(Errc::kMissingColumn, "data: label column '" + spec + "' not in header");
}

int map_label(const std::map<std::string, int>& mapping, const std::string& cell,
              std::size_t row) {
  if (auto it = mapping.find(cell); it != mapping.end()) return it->second;
  if (const auto v = parse_number(cell)) {
    for (const auto& [key, cls] : mapping) {
      if (const auto k = parse_number(key); k && *k == *v) return cls;
    }
  }
  throw Error(Errc::kUnknownLabelValue,
              "data: unknown label value '" + cell + "' at row " + std::to_string(row));
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset d;
  d.features = features.select_rows(rows);
  d.labels.reserve(rows.size());
  for (std::size_t r : rows) d.labels.push_back(labels[r]);
  d.feature_names = feature_names;
  return d;
}

Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIoError, "data: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str(), options, path.string());
}

Dataset parse_dataset(const std::string& text, const LoadOptions& options,
                      const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw Error(Errc::kParseError, "data: " + source + " has no header row");

  const std::size_t label_col = resolve_label_column(header, options.label_column);
  std::vector<bool> dropped(header.size(), false);
  for (const auto& name : options.drop_columns) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error(Errc::kMissingColumn, "data: column '" + name + "' to drop not in header");
    }
    dropped[static_cast<std::size_t>(it - header.begin())] = true;
  }

  Dataset d;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_col || dropped[c]) continue;
    feature_cols.push_back(c);
    d.feature_names.push_back(header[c]);
  }
  if (feature_cols.empty()) throw Error(Errc::kParseError, "data: " + source + " has no features");

  std::vector<double> row(feature_cols.size());
  std::size_t row_number = 1;  // header is row 1
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(Errc::kParseError, "data: " + source + " row " + std::to_string(row_number) +
                                         " has " + std::to_string(cells.size()) +
                                         " cells, header has " + std::to_string(header.size()));
    }
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      const std::size_t c = feature_cols[k];
      const auto v = parse_number(cells[c]);
      if (!v) {
        throw Error(Errc::kParseError, "data: " + source + " row " +
                                           std::to_string(row_number) + ", column '" +
                                           header[c] + "': cannot parse '" + cells[c] +
                                           "' as a finite number");
      }
      row[k] = *v;
    }
    d.features.append_row(row);
    d.labels.push_back(map_label(options.label_mapping, cells[label_col], row_number));
  }
  if (d.labels.empty()) d.features = Matrix(0, feature_cols.size());
  return d;
}

std::size_t StreamSplit::stream_rows() const {
  std::size_t n = 0;
  for (const auto& b : batches) n += b.size();
  return n;
}

std::size_t fraction_floor(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

std::size_t fraction_ceil(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

StreamSplit split_stream(const Dataset& d, double test_fraction, double initial_fraction,
                         BatchRange batch_range, std::mt19937_64& rng) {
  if (!(test_fraction > 0.0) || !(initial_fraction > 0.0) ||
      !(test_fraction + initial_fraction < 1.0)) {
    throw Error(Errc::kInvalidArgument,
                "data: fractions must be positive with a sum below 1");
  }
  if (batch_range.min < 1 || batch_range.min > batch_range.max) {
    throw Error(Errc::kInvalidArgument, "data: batch range must satisfy 1 <= min <= max");
  }
  const std::size_t n = d.size();
  const std::size_t n_test = fraction_floor(test_fraction, n);
  const std::size_t remaining = n - n_test;
  const std::size_t n_initial = fraction_floor(initial_fraction, remaining);
  const std::size_t n_stream = remaining - n_initial;
  if (n_test == 0 || n_initial == 0 || n_stream == 0) {
    throw Error(Errc::kInsufficientRows,
                "data: " + std::to_string(n) + " rows give test=" + std::to_string(n_test) +
                    ", initial=" + std::to_string(n_initial) +
                    ", stream=" + std::to_string(n_stream));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  StreamSplit s;
  const auto* it = order.data();
  s.test = d.subset({it, n_test});
  it += n_test;
  s.initial = d.subset({it, n_initial});
  it += n_initial;
  std::uniform_int_distribution<std::size_t> size_dist(batch_range.min, batch_range.max);
  std::size_t left = n_stream;
  while (left > 0) {
    const std::size_t size = std::min(left, size_dist(rng));
    s.batches.push_back(d.subset({it, size}));
    it += size;
    left -= size;
  }
  return s;
}

Dataset make_synthetic(std::size_t n, std::size_t p, std::uint64_t seed) {
  if (p == 0) throw Error(Errc::kInvalidArgument, "data: synthetic data needs p >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Dataset d;
  for (std::size_t j = 0; j < p; ++j) d.feature_names.push_back("x" + std::to_string(j));
  std::vector<double> row(p);
  for (std::size_t i = 0; i < n; ++i) {
    double logit = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      row[j] = u(rng);
      const double x = row[j];
      switch (j % 4) {
        case 0: logit += 3.0 * std::tanh(1.5 * x) / static_cast<double>(1 + j / 4); break;
        case 1: logit += 1.5 * (x * x - 4.0 / 3.0) / static_cast<double>(1 + j / 4); break;
        case 2: logit += 1.0 * std::sin(2.0 * x) / static_cast<double>(1 + j / 4); break;
        default: break;  // pure noise feature
      }
    }
    d.features.append_row(row);
    d.labels.push_back(coin(rng) < 1.0 / (1.0 + std::exp(-logit)) ? 1 : 0);
  }
  return d;
}

Standardizer::Standardizer(const Matrix& reference)
    : mean_(reference.cols(), 0.0), scale_(reference.cols(), 1.0) {
  const std::size_t n = reference.rows();
  if (n == 0) return;
  for (std::size_t j = 0; j < reference.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += reference(i, j);
    mean_[j] = s / static_cast<double>(n);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += (reference(i, j) - mean_[j]) * (reference(i, j) - mean_[j]);
    const double sd = std::sqrt(v / static_cast<double>(n));
    scale_[j] = sd > 1e-12 ? sd : 1.0;
  }
}

void Standardizer::apply(Matrix& m) const {
  if (m.cols() != mean_.size()) {
    throw Error(Errc::kDimensionMismatch, "data: standardizer width mismatch");
  }
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = (m(i, j) - mean_[j]) / scale_[j];
}

}  // namespace addgp
