#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "addgp/error.hpp"
#include "addgp/linalg.hpp"

namespace addgp {

/// Squared Exponential hyperparameters, stored in log space.
struct SEParams {
  double log_signal_variance = 0.0;
  double log_lengthscale = 0.0;

  double signal_variance() const { return std::exp(log_signal_variance); }
  double lengthscale() const { return std::exp(log_lengthscale); }
};

/// k(x, x') = k0 + sum_j k_j(x_j, x'_j) with one 1-D SE component per input
/// dimension.
struct AdditiveKernelParams {
  double log_bias_variance = 0.0;
  std::vector<SEParams> components;

  double bias_variance() const { return std::exp(log_bias_variance); }
  std::size_t dim() const { return components.size(); }

  /// Identical components for every dimension.
  static AdditiveKernelParams uniform(std::size_t p, double log_bias_variance = 0.0,
                                      SEParams component = {});
};

using KernelParams = std::variant<SEParams, AdditiveKernelParams>;

inline bool is_additive(const KernelParams& k) {
  return std::holds_alternative<AdditiveKernelParams>(k);
}

/// sigma_f^2 * exp(-||x - x2||^2 / (2 l^2)).
double se_eval(const SEParams& params, std::span<const double> x, std::span<const double> x2);

/// One-dimensional SE evaluated on scalar coordinates.
double se_eval_scalar(const SEParams& params, double a, double b);

double additive_eval(const AdditiveKernelParams& params, std::span<const double> x,
                     std::span<const double> x2);

double kernel_eval(const KernelParams& params, std::span<const double> x,
                   std::span<const double> x2);

/// k(x, x): sigma_f^2 for SE, k0 + sum_j sigma_f,j^2 for the additive kernel.
double prior_variance(const KernelParams& params);

/// Number of input columns the kernel expects, or 0 when any width is fine.
std::size_t input_dim(const KernelParams& params);

namespace detail {
inline void require_same_cols(const Matrix& x, const Matrix& x2) {
  if (x.cols() != x2.cols()) {
    throw Error(Errc::kDimensionMismatch, "kernels: gram inputs have " +
                                              std::to_string(x.cols()) + " and " +
                                              std::to_string(x2.cols()) + " columns");
  }
}
}  // namespace detail

/// Entry (i, k) = kernel(row i of x, row k of x2). Rows are filled in
/// parallel; each entry is a single kernel call, so the result is identical
/// to reference::gram.
template <class Kernel>
Matrix gram(const Kernel& kernel, const Matrix& x, const Matrix& x2) {
  detail::require_same_cols(x, x2);
  Matrix out(x.rows(), x2.rows());
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    const auto xi = x.row(r);
    for (std::size_t k = 0; k < x2.rows(); ++k) out(r, k) = kernel(xi, x2.row(k));
  }
  return out;
}

/// Symmetric Gram of x against itself: the upper triangle is evaluated and
/// mirrored.
template <class Kernel>
Matrix gram_symmetric(const Kernel& kernel, const Matrix& x) {
  const std::size_t n = x.rows();
  Matrix out(n, n);
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const auto r = static_cast<std::size_t>(i);
    const auto xi = x.row(r);
    for (std::size_t k = r; k < n; ++k) out(r, k) = kernel(xi, x.row(k));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < i; ++k) out(i, k) = out(k, i);
  return out;
}

Matrix gram(const KernelParams& params, const Matrix& x, const Matrix& x2);
Matrix gram_symmetric(const KernelParams& params, const Matrix& x);

/// v_i = k_j(x[i, j], xstar[j]); only coordinate j participates and the bias
/// is excluded.
std::vector<double> component_cross(const AdditiveKernelParams& params, std::size_t j,
                                    const Matrix& x, std::span<const double> xstar);

/// n x n Gram of component j alone over the rows of x.
Matrix component_gram(const AdditiveKernelParams& params, std::size_t j, const Matrix& x);

namespace reference {

template <class Kernel>
Matrix gram(const Kernel& kernel, const Matrix& x, const Matrix& x2) {
  detail::require_same_cols(x, x2);
  Matrix out(x.rows(), x2.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t k = 0; k < x2.rows(); ++k) out(i, k) = kernel(x.row(i), x2.row(k));
  return out;
}

}  // namespace reference

/// How additive-kernel hyperparameters map onto the free optimization vector.
enum class Tying {
  kIndependent,        // log k0, then (log sigma_f^2, log l) per dimension: 2p + 1
  kSharedLengthscale,  // log k0, log sigma_f^2 per dimension, one log l: p + 2
  kSharedAll,          // log k0, one log sigma_f^2, one log l: 3
};

/// Box constraints applied during hyperparameter search.
struct HyperBounds {
  double log_lengthscale_min = -3.0;
  double log_lengthscale_max = 4.0;
  double log_signal_variance_min = -3.0;
  double log_signal_variance_max = 3.0;
  double log_bias_variance_min = -5.0;
  double log_bias_variance_max = 2.0;
};

/// Flattens kernel hyperparameters into the free vector used by the
/// optimizer. SE kernels always map to (log sigma_f^2, log l).
std::vector<double> pack(const KernelParams& params, Tying tying);

/// Inverse of pack; `shape` supplies the kernel kind and dimensionality.
KernelParams unpack(const KernelParams& shape, std::span<const double> theta, Tying tying);

/// Per-coordinate lower and upper bounds matching the pack layout.
std::pair<std::vector<double>, std::vector<double>> bounds(const KernelParams& shape,
                                                           Tying tying,
                                                           const HyperBounds& box = {});

}  // namespace addgp
