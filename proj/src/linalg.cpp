#include "addgp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "addgp/error.hpp"

namespace addgp {

namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr std::size_t kParallelRowThreshold = 128;

// Column-oriented factorization: once the diagonal of column j is known, every
// entry below it depends only on earlier columns, so the rows are independent.
std::optional<Matrix> factor_parallel(const Matrix& m, double jitter) {
  const std::size_t n = m.rows();
  Matrix lower(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double* lj = &lower(j, 0);
    const double d = m(j, j) + jitter - detail::dot_unrolled(lj, lj, j);
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    const double ljj = std::sqrt(d);
    lower(j, j) = ljj;
    const auto begin = static_cast<std::ptrdiff_t>(j + 1);
    const auto end = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (n - j > kParallelRowThreshold)
    for (std::ptrdiff_t i = begin; i < end; ++i) {
      const auto row = static_cast<std::size_t>(i);
      lower(row, j) = (m(row, j) - detail::dot_unrolled(&lower(row, 0), lj, j)) / ljj;
    }
  }
  return lower;
}

std::optional<Matrix> factor_serial(const Matrix& m, double jitter) {
  const std::size_t n = m.rows();
  Matrix lower(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* li = &lower(i, 0);
    for (std::size_t j = 0; j < i; ++j) {
      lower(i, j) = (m(i, j) - detail::dot_unrolled(li, &lower(j, 0), j)) / lower(j, j);
    }
    const double d = m(i, i) + jitter - detail::dot_unrolled(li, li, i);
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    lower(i, i) = std::sqrt(d);
  }
  return lower;
}

template <class Factor>
CholeskyFactor factor_with_ladder(const Matrix& m, double max_jitter, Factor&& factor) {
  detail::check_symmetric(m);
  for (double jitter : detail::jitter_ladder(max_jitter)) {
    if (auto lower = factor(m, jitter)) return CholeskyFactor{std::move(*lower), jitter};
  }
  throw Error(Errc::kNotPositiveDefinite,
              "linalg: factorization of " + std::to_string(m.rows()) + "x" +
                  std::to_string(m.cols()) + " matrix failed at jitter " +
                  std::to_string(max_jitter));
}

void require_dim(const CholeskyFactor& factor, std::size_t n) {
  if (factor.dim() != n) {
    throw Error(Errc::kDimensionMismatch, "linalg: right-hand side has length " +
                                              std::to_string(n) + ", factor has dimension " +
                                              std::to_string(factor.dim()));
  }
}

}  // namespace

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  for (const auto& r : rows) append_row(std::span<const double>(r.begin(), r.size()));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && data_.empty()) cols_ = values.size();
  if (values.size() != cols_) {
    throw Error(Errc::kDimensionMismatch, "linalg: row of length " +
                                              std::to_string(values.size()) +
                                              " appended to matrix with " +
                                              std::to_string(cols_) + " columns");
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= rows_) {
      throw Error(Errc::kIndexOutOfRange, "linalg: row " + std::to_string(indices[k]) +
                                              " of " + std::to_string(rows_));
    }
    std::copy_n(row(indices[k]).begin(), cols_, out.row(k).begin());
  }
  return out;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(Errc::kDimensionMismatch, "linalg: cannot multiply " +
                                              std::to_string(a.rows()) + "x" +
                                              std::to_string(a.cols()) + " by " +
                                              std::to_string(b.rows()) + "x" +
                                              std::to_string(b.cols()));
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

std::vector<double> multiply(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw Error(Errc::kDimensionMismatch, "linalg: matrix-vector size mismatch");
  }
  std::vector<double> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    y[i] = detail::dot_unrolled(a.row(i).data(), x.data(), x.size());
  }
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::kDimensionMismatch, "linalg: dot size mismatch");
  return detail::dot_unrolled(a.data(), b.data(), a.size());
}

CholeskyFactor cholesky(const Matrix& m, double max_jitter) {
  return factor_with_ladder(m, max_jitter, factor_parallel);
}

std::vector<double> solve_lower(const CholeskyFactor& factor, std::span<const double> b) {
  require_dim(factor, b.size());
  const Matrix& l = factor.lower;
  std::vector<double> x(b.begin(), b.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = (x[i] - detail::dot_unrolled(l.row(i).data(), x.data(), i)) / l(i, i);
  }
  return x;
}

std::vector<double> solve_lower_transpose(const CholeskyFactor& factor,
                                          std::span<const double> b) {
  require_dim(factor, b.size());
  const Matrix& l = factor.lower;
  std::vector<double> x(b.begin(), b.end());
  // Column-oriented back substitution keeps the inner loop on contiguous rows.
  for (std::size_t i = x.size(); i-- > 0;) {
    x[i] /= l(i, i);
    const double xi = x[i];
    const double* li = l.row(i).data();
    for (std::size_t k = 0; k < i; ++k) x[k] -= li[k] * xi;
  }
  return x;
}

std::vector<double> solve_psd(const CholeskyFactor& factor, std::span<const double> b) {
  return solve_lower_transpose(factor, solve_lower(factor, b));
}

Matrix solve_lower(const CholeskyFactor& factor, const Matrix& b) {
  require_dim(factor, b.rows());
  const Matrix& l = factor.lower;
  Matrix x = b;
  const std::size_t m = b.cols();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xi = x.row(i);
    for (std::size_t k = 0; k < i; ++k) {
      const double lik = l(i, k);
      if (lik == 0.0) continue;
      const auto xk = x.row(k);
      for (std::size_t c = 0; c < m; ++c) xi[c] -= lik * xk[c];
    }
    const double inv = 1.0 / l(i, i);
    for (std::size_t c = 0; c < m; ++c) xi[c] *= inv;
  }
  return x;
}

double log_det(const CholeskyFactor& factor) {
  double s = 0.0;
  for (std::size_t i = 0; i < factor.dim(); ++i) s += std::log(factor.lower(i, i));
  return 2.0 * s;
}

namespace reference {

CholeskyFactor cholesky(const Matrix& m, double max_jitter) {
  return factor_with_ladder(m, max_jitter, factor_serial);
}

}  // namespace reference

namespace detail {

void check_symmetric(const Matrix& m) {
  if (!m.square()) {
    throw Error(Errc::kNotSymmetric, "linalg: matrix is " + std::to_string(m.rows()) + "x" +
                                         std::to_string(m.cols()) + ", not square");
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double a = m(i, j), b = m(j, i);
      if (!(std::abs(a - b) <= kSymmetryTolerance * std::max(1.0, std::abs(a)))) {
        throw Error(Errc::kNotSymmetric, "linalg: entries (" + std::to_string(i) + "," +
                                             std::to_string(j) + ") and transpose differ");
      }
    }
  }
}

std::vector<double> jitter_ladder(double max_jitter) {
  std::vector<double> ladder{0.0};
  for (int e = -8; e <= 0; ++e) {
    const double j = std::pow(10.0, e);
    if (j > max_jitter * (1.0 + 1e-12)) break;
    ladder.push_back(j);
  }
  return ladder;
}

}  // namespace detail

}  // namespace addgp
