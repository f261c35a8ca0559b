#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace addgp {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  const double& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  /// Appends a row; the first row fixes the column count of an empty matrix.
  void append_row(std::span<const double> values);

  /// Copies the selected rows, in the order given.
  Matrix select_rows(std::span<const std::size_t> indices) const;

  bool all_finite() const noexcept;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix transpose(const Matrix& m);
Matrix multiply(const Matrix& a, const Matrix& b);
std::vector<double> multiply(const Matrix& a, std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);

struct CholeskyFactor {
  Matrix lower;
  double jitter_used = 0.0;

  std::size_t dim() const noexcept { return lower.rows(); }
};

inline constexpr double kDefaultMaxJitter = 1e-2;

/// Factors M + jitter * I = L * L^T, escalating jitter over
/// {0, 1e-8, 1e-7, ..., max_jitter} until the factorization succeeds.
/// Rows below the diagonal of each column are computed in parallel; the
/// result does not depend on the thread count.
CholeskyFactor cholesky(const Matrix& m, double max_jitter = kDefaultMaxJitter);

/// Solves (L L^T) x = b.
std::vector<double> solve_psd(const CholeskyFactor& factor, std::span<const double> b);

/// Solves L x = b by forward substitution.
std::vector<double> solve_lower(const CholeskyFactor& factor, std::span<const double> b);

/// Solves L^T x = b by back substitution.
std::vector<double> solve_lower_transpose(const CholeskyFactor& factor,
                                          std::span<const double> b);

/// Solves L X = B column-by-column; B has dim() rows.
Matrix solve_lower(const CholeskyFactor& factor, const Matrix& b);

/// log det(L L^T) = 2 * sum(log diag(L)).
double log_det(const CholeskyFactor& factor);

namespace reference {

/// Single-threaded row-by-row (Banachiewicz) factorization with the same
/// jitter ladder. Kept as the baseline for tests and benchmarks.
CholeskyFactor cholesky(const Matrix& m, double max_jitter = kDefaultMaxJitter);

}  // namespace reference

namespace detail {

// Fixed-order four-way unrolled dot product shared by both factorizations so
// that they agree bit-for-bit.
inline double dot_unrolled(const double* a, const double* b, std::size_t n) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    s0 += a[k] * b[k];
    s1 += a[k + 1] * b[k + 1];
    s2 += a[k + 2] * b[k + 2];
    s3 += a[k + 3] * b[k + 3];
  }
  for (; k < n; ++k) s0 += a[k] * b[k];
  return (s0 + s1) + (s2 + s3);
}

void check_symmetric(const Matrix& m);
std::vector<double> jitter_ladder(double max_jitter);

}  // namespace detail

}  // namespace addgp
