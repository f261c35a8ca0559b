#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "addgp/kernels.hpp"
#include "addgp/linalg.hpp"

namespace addgp {

/// Latent posterior at one test point.
struct LatentPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

struct RegressionPosterior {
  std::vector<double> mean;
  Matrix covariance;
};

/// Exact GP regression posterior with zero prior mean:
///   mean = K_mn (K_n + s2 I)^-1 y
///   cov  = K_mm - K_mn (K_n + s2 I)^-1 K_nm
RegressionPosterior gp_regression_posterior(const Matrix& x, std::span<const double> y,
                                            const Matrix& xstar, const KernelParams& kernel,
                                            double noise_variance);

struct LaplaceOptions {
  double tolerance = 1e-6;  // max |delta f| between Newton iterates
  int max_iterations = 100;
  double nonconvergence_residual = 1e-3;
};

/// Fitted Laplace approximation to the logistic GP classifier. Immutable once
/// built; prediction is safe from multiple threads.
struct LaplaceState {
  Matrix x_train;
  std::vector<double> y_pm;  // labels as -1 / +1
  KernelParams kernel;
  std::vector<double> f_hat;
  std::vector<double> grad_at_mode;  // d log p(y|f) / df at f_hat
  std::vector<double> w_sqrt;        // sqrt of -d2 log p(y|f) / df2 at f_hat
  CholeskyFactor b_factor;           // chol(I + W^1/2 K W^1/2)
  double log_marginal = 0.0;         // Laplace approximate log evidence
  int iterations = 0;

  std::size_t size() const { return f_hat.size(); }
};

/// Newton iterations for the mode of log p(y|f) - f^T K^-1 f / 2 using the
/// W^1/2 parameterization. Labels are 0/1.
LaplaceState fit_laplace(const Matrix& x, std::span<const int> y, const KernelParams& kernel,
                         const LaplaceOptions& options = {});

/// Same as fit_laplace with a precomputed Gram matrix and an optional warm
/// start (the dual vector a with f = K a from an earlier fit).
LaplaceState fit_laplace_with_gram(const Matrix& x, std::span<const int> y,
                                   const KernelParams& kernel, const Matrix& k,
                                   std::span<const double> warm_alpha = {},
                                   const LaplaceOptions& options = {});

/// mean = k*^T grad_at_mode, variance = k** - k*^T (K + W^-1)^-1 k*.
LatentPrediction predict_latent(const LaplaceState& state, std::span<const double> xstar);

/// Row-parallel predict_latent over every row of xstar.
std::vector<LatentPrediction> predict_latent(const LaplaceState& state, const Matrix& xstar);

/// Variance term k_a** - v^T (K + W^-1)^-1 v for an arbitrary cross vector.
double posterior_variance_term(const LaplaceState& state, std::span<const double> cross,
                               double prior_var);

/// p(y = 1 | x*) integrated over the latent Gaussian with 20-node Gauss-Hermite.
double predict_proba(const LaplaceState& state, std::span<const double> xstar);

enum class HyperGradient { kAnalytic, kFiniteDifference };

struct HyperOptions {
  Tying tying = Tying::kIndependent;
  HyperBounds box{};
  HyperGradient gradient = HyperGradient::kAnalytic;
  double fd_step = 1e-4;  // central differences, log-space
  LaplaceOptions laplace{};
};

struct HyperResult {
  KernelParams params;
  double log_marginal = 0.0;
  double initial_log_marginal = 0.0;
  int iterations = 0;
  int evaluations = 0;
};

/// d log_marginal / d theta for the packed (log-space) hyperparameters,
/// including the implicit dependence of the mode on theta.
std::vector<double> log_marginal_gradient(const LaplaceState& state, Tying tying);

/// Gradient ascent on the Laplace log evidence in log-space with a
/// backtracking line search inside the clamp box. Only improving steps
/// are accepted, so the result is never worse than the (clamped) init.
HyperResult optimize_hyperparameters(const Matrix& x, std::span<const int> y,
                                     const KernelParams& init, int budget,
                                     const HyperOptions& options = {});

}  // namespace addgp
