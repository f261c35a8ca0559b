#include "addgp/gp_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "addgp/error.hpp"
#include "addgp/gauss_hermite.hpp"

namespace addgp {

namespace {

// log sigmoid(z), stable for large |z|.
double log_sigmoid(double z) {
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

std::vector<double> to_pm(std::span<const int> y) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) {
      throw Error(Errc::kDomainError,
                  "gp_classifier: label " + std::to_string(y[i]) + " at row " +
                      std::to_string(i) + " is not 0/1");
    }
    out[i] = y[i] == 1 ? 1.0 : -1.0;
  }
  return out;
}

double penalized_objective(std::span<const double> a, std::span<const double> f,
                           std::span<const double> y_pm) {
  double s = -0.5 * dot(a, f);
  for (std::size_t i = 0; i < f.size(); ++i) s += log_sigmoid(y_pm[i] * f[i]);
  return s;
}

struct Curvature {
  std::vector<double> grad;
  std::vector<double> w;
};

Curvature curvature(std::span<const double> f, std::span<const double> y_pm) {
  Curvature c{std::vector<double>(f.size()), std::vector<double>(f.size())};
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double pi = sigmoid(f[i]);
    c.grad[i] = 0.5 * (y_pm[i] + 1.0) - pi;
    c.w[i] = pi * (1.0 - pi);
  }
  return c;
}

CholeskyFactor factor_b(const Matrix& k, std::span<const double> w_sqrt) {
  const std::size_t n = k.rows();
  Matrix b(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) b(i, j) = w_sqrt[i] * k(i, j) * w_sqrt[j];
    b(i, i) += 1.0;
  }
  return cholesky(b);
}

std::vector<double> sqrt_all(std::span<const double> w) {
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = std::sqrt(std::max(w[i], 0.0));
  return out;
}

std::vector<double> cross_vector(const LaplaceState& state, std::span<const double> xstar) {
  const std::size_t p = state.x_train.cols();
  if (xstar.size() != p) {
    throw Error(Errc::kDimensionMismatch, "gp_classifier: test point has " +
                                              std::to_string(xstar.size()) +
                                              " features, model expects " + std::to_string(p));
  }
  Matrix single(1, p);
  std::copy(xstar.begin(), xstar.end(), single.row(0).begin());
  const Matrix row = gram(state.kernel, single, state.x_train);
  return {row.values().begin(), row.values().end()};
}

LatentPrediction predict_one(const LaplaceState& state, std::span<const double> xstar) {
  const auto k_star = cross_vector(state, xstar);
  const double prior = kernel_eval(state.kernel, xstar, xstar);
  return {dot(k_star, state.grad_at_mode), posterior_variance_term(state, k_star, prior)};
}

}  // namespace

RegressionPosterior gp_regression_posterior(const Matrix& x, std::span<const double> y,
                                            const Matrix& xstar, const KernelParams& kernel,
                                            double noise_variance) {
  if (noise_variance < 0.0) {
    throw Error(Errc::kDomainError, "gp_classifier: negative noise variance");
  }
  if (y.size() != x.rows()) {
    throw Error(Errc::kDimensionMismatch, "gp_classifier: " + std::to_string(y.size()) +
                                              " targets for " + std::to_string(x.rows()) +
                                              " training rows");
  }
  Matrix ky = gram_symmetric(kernel, x);
  for (std::size_t i = 0; i < ky.rows(); ++i) ky(i, i) += noise_variance;
  const CholeskyFactor chol = cholesky(ky);
  const Matrix k_nm = gram(kernel, x, xstar);
  const auto alpha = solve_psd(chol, y);

  RegressionPosterior post;
  post.mean.resize(xstar.rows());
  for (std::size_t m = 0; m < xstar.rows(); ++m) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) s += k_nm(i, m) * alpha[i];
    post.mean[m] = s;
  }
  // cov = K_mm - V^T V with V = L^-1 K_nm.
  const Matrix v = solve_lower(chol, k_nm);
  post.covariance = gram_symmetric(kernel, xstar);
  for (std::size_t a = 0; a < xstar.rows(); ++a) {
    for (std::size_t b = a; b < xstar.rows(); ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < v.rows(); ++i) s += v(i, a) * v(i, b);
      post.covariance(a, b) -= s;
      post.covariance(b, a) = post.covariance(a, b);
    }
  }
  return post;
}

LaplaceState fit_laplace(const Matrix& x, std::span<const int> y, const KernelParams& kernel,
                         const LaplaceOptions& options) {
  return fit_laplace_with_gram(x, y, kernel, gram_symmetric(kernel, x), {}, options);
}

LaplaceState fit_laplace_with_gram(const Matrix& x, std::span<const int> y,
                                   const KernelParams& kernel, const Matrix& k,
                                   std::span<const double> warm_alpha,
                                   const LaplaceOptions& options) {
  const std::size_t n = x.rows();
  if (y.size() != n) {
    throw Error(Errc::kDimensionMismatch, "gp_classifier: " + std::to_string(y.size()) +
                                              " labels for " + std::to_string(n) + " rows");
  }
  if (n == 0) throw Error(Errc::kInsufficientRows, "gp_classifier: empty training set");
  if (const std::size_t p = input_dim(kernel); p != 0 && p != x.cols()) {
    throw Error(Errc::kDimensionMismatch, "gp_classifier: kernel expects " + std::to_string(p) +
                                              " features, data has " +
                                              std::to_string(x.cols()));
  }

  LaplaceState s;
  s.y_pm = to_pm(y);

  std::vector<double> a(n, 0.0), f(n, 0.0);
  double psi = penalized_objective(a, f, s.y_pm);
  if (warm_alpha.size() == n) {
    auto f_warm = multiply(k, warm_alpha);
    const double psi_warm = penalized_objective(warm_alpha, f_warm, s.y_pm);
    if (psi_warm > psi) {
      a.assign(warm_alpha.begin(), warm_alpha.end());
      f = std::move(f_warm);
      psi = psi_warm;
    }
  }

  bool converged = false;
  int it = 0;
  while (it < options.max_iterations) {
    ++it;
    const auto c = curvature(f, s.y_pm);
    const auto w_sqrt = sqrt_all(c.w);
    const CholeskyFactor l = factor_b(k, w_sqrt);

    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = c.w[i] * f[i] + c.grad[i];
    auto kb = multiply(k, b);
    for (std::size_t i = 0; i < n; ++i) kb[i] *= w_sqrt[i];
    auto t = solve_psd(l, kb);
    std::vector<double> da(n);
    for (std::size_t i = 0; i < n; ++i) da[i] = b[i] - w_sqrt[i] * t[i] - a[i];

    // Full Newton step unless it lowers the objective; then halve.
    double step = 1.0;
    std::vector<double> a_try(n), f_try;
    double psi_try = -std::numeric_limits<double>::infinity();
    for (int h = 0; h < 30; ++h) {
      for (std::size_t i = 0; i < n; ++i) a_try[i] = a[i] + step * da[i];
      f_try = multiply(k, a_try);
      psi_try = penalized_objective(a_try, f_try, s.y_pm);
      if (psi_try >= psi - 1e-12 * std::max(1.0, std::abs(psi))) break;
      step *= 0.5;
    }
    double max_df = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_df = std::max(max_df, std::abs(f_try[i] - f[i]));
    a = std::move(a_try);
    f = std::move(f_try);
    psi = psi_try;
    if (max_df <= options.tolerance) {
      converged = true;
      break;
    }
  }

  const auto c = curvature(f, s.y_pm);
  s.w_sqrt = sqrt_all(c.w);
  s.b_factor = factor_b(k, s.w_sqrt);
  s.grad_at_mode = c.grad;
  s.iterations = it;

  if (!converged) {
    const auto kg = multiply(k, s.grad_at_mode);
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(f[i] - kg[i]));
    if (!(residual <= options.nonconvergence_residual)) {
      throw Error(Errc::kNonConvergence,
                  "gp_classifier: Newton iterations exhausted after " + std::to_string(it) +
                      " steps with stationarity residual " + std::to_string(residual));
    }
  }

  double half_log_det = 0.0;
  for (std::size_t i = 0; i < n; ++i) half_log_det += std::log(s.b_factor.lower(i, i));
  s.log_marginal = psi - half_log_det;
  s.f_hat = std::move(f);
  s.x_train = x;
  s.kernel = kernel;
  return s;
}

double posterior_variance_term(const LaplaceState& state, std::span<const double> cross,
                               double prior_var) {
  std::vector<double> scaled(cross.size());
  for (std::size_t i = 0; i < cross.size(); ++i) scaled[i] = state.w_sqrt[i] * cross[i];
  const auto v = solve_lower(state.b_factor, scaled);
  const double var = prior_var - dot(v, v);
  return std::clamp(var, 0.0, prior_var);
}

LatentPrediction predict_latent(const LaplaceState& state, std::span<const double> xstar) {
  return predict_one(state, xstar);
}

std::vector<LatentPrediction> predict_latent(const LaplaceState& state, const Matrix& xstar) {
  if (xstar.cols() != state.x_train.cols()) {
    throw Error(Errc::kDimensionMismatch, "gp_classifier: test matrix has " +
                                              std::to_string(xstar.cols()) + " columns");
  }
  std::vector<LatentPrediction> out(xstar.rows());
  const auto m = static_cast<std::ptrdiff_t>(xstar.rows());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t r = 0; r < m; ++r) {
    const auto i = static_cast<std::size_t>(r);
    out[i] = predict_one(state, xstar.row(i));
  }
  return out;
}

double predict_proba(const LaplaceState& state, std::span<const double> xstar) {
  const auto latent = predict_latent(state, xstar);
  return expected_sigmoid(latent.mean, latent.variance);
}

// ---------------------------------------------------------------------------
// Evidence gradient

namespace {

// Inverse of a lower-triangular matrix, column by column.
Matrix lower_inverse(const Matrix& l) {
  const std::size_t n = l.rows();
  Matrix inv(n, n);
  const auto cols = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t cc = 0; cc < cols; ++cc) {
    const auto c = static_cast<std::size_t>(cc);
    inv(c, c) = 1.0 / l(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      const double* li = l.row(i).data();
      double s = 0.0;
      for (std::size_t k = c; k < i; ++k) s += li[k] * inv(k, c);
      inv(i, c) = -s / li[i];
    }
  }
  return inv;
}

// Sums M .* Q over all entries for the derivative matrices of every raw
// hyperparameter without materializing them. Raw layout: [bias, (sigma_j,
// l_j) per component] for additive kernels, [sigma, l] for SE. Row partials
// are reduced serially so the result does not depend on the thread count.
std::vector<double> raw_kernel_gradient(const KernelParams& kernel, const Matrix& x,
                                        const Matrix& q) {
  const std::size_t n = x.rows();
  const auto* add = std::get_if<AdditiveKernelParams>(&kernel);
  const std::size_t p = add ? add->dim() : 1;
  const std::size_t raw = add ? 1 + 2 * p : 2;
  Matrix partial(n, raw, 0.0);
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t rr = 0; rr < rows; ++rr) {
    const auto i = static_cast<std::size_t>(rr);
    auto acc = partial.row(i);
    const auto xi = x.row(i);
    const double* qi = q.row(i).data();
    if (add) {
      double qsum = 0.0;
      for (std::size_t k = 0; k < n; ++k) qsum += qi[k];
      acc[0] = add->bias_variance() * qsum;
      for (std::size_t j = 0; j < p; ++j) {
        const double sv = add->components[j].signal_variance();
        const double l = add->components[j].lengthscale();
        const double inv_l2 = 1.0 / (l * l);
        double gs = 0.0, gl = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double d = xi[j] - x(k, j);
          const double r2 = d * d * inv_l2;
          const double e = sv * std::exp(-0.5 * r2) * qi[k];
          gs += e;
          gl += e * r2;
        }
        acc[1 + 2 * j] = gs;
        acc[2 + 2 * j] = gl;
      }
    } else {
      const auto& se = std::get<SEParams>(kernel);
      const double sv = se.signal_variance();
      const double inv_l2 = 1.0 / (se.lengthscale() * se.lengthscale());
      double gs = 0.0, gl = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const auto xk = x.row(k);
        double d2 = 0.0;
        for (std::size_t c = 0; c < xi.size(); ++c) d2 += (xi[c] - xk[c]) * (xi[c] - xk[c]);
        const double r2 = d2 * inv_l2;
        const double e = sv * std::exp(-0.5 * r2) * qi[k];
        gs += e;
        gl += e * r2;
      }
      acc[0] = gs;
      acc[1] = gl;
    }
  }
  std::vector<double> g(raw, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < raw; ++r) g[r] += partial(i, r);
  return g;
}

std::vector<double> tie_gradient(const KernelParams& kernel, const std::vector<double>& raw,
                                 Tying tying) {
  const auto* add = std::get_if<AdditiveKernelParams>(&kernel);
  if (add == nullptr) return raw;
  const std::size_t p = add->dim();
  switch (tying) {
    case Tying::kIndependent:
      return raw;
    case Tying::kSharedLengthscale: {
      std::vector<double> g{raw[0]};
      double gl = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        g.push_back(raw[1 + 2 * j]);
        gl += raw[2 + 2 * j];
      }
      g.push_back(gl);
      return g;
    }
    case Tying::kSharedAll: {
      double gs = 0.0, gl = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        gs += raw[1 + 2 * j];
        gl += raw[2 + 2 * j];
      }
      return {raw[0], gs, gl};
    }
  }
  return raw;
}

// With a = grad log p at the mode, R = W^1/2 B^-1 W^1/2 and
// s2 = diag((K^-1 + W)^-1) .* d3 log p / 2 (the mode's implicit dependence), d log q / d theta = sum(dK .* Q) where
// Q = (a z^T + z a^T) / 2 - R / 2 and z = a / 2 + s2 - R K s2.
std::vector<double> gradient_with_gram(const LaplaceState& state, const Matrix& k, Tying tying) {
  const std::size_t n = state.size();
  const auto& sw = state.w_sqrt;
  const auto& a = state.grad_at_mode;
  const Matrix linv = lower_inverse(state.b_factor.lower);
  const Matrix u = transpose(linv);  // upper triangular

  // R_ij = sw_i sw_j sum_{m >= max(i,j)} Linv_mi Linv_mj
  Matrix r(n, n);
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double* ui = u.row(i).data();
    for (std::size_t j = i; j < n; ++j) {
      const double g = detail::dot_unrolled(ui + j, u.row(j).data() + j, n - j);
      r(i, j) = sw[i] * sw[j] * g;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) r(i, j) = r(j, i);

  // Posterior marginal variances diag(K) - diag(C^T C) with C = Linv W^1/2 K.
  std::vector<double> s2(n);
  Matrix c(n, n, 0.0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t mm = 0; mm < rows; ++mm) {
    const auto m = static_cast<std::size_t>(mm);
    double* cm = c.row(m).data();
    for (std::size_t t = 0; t <= m; ++t) {
      const double coef = linv(m, t) * sw[t];
      const double* kt = k.row(t).data();
      for (std::size_t i = 0; i < n; ++i) cm[i] += coef * kt[i];
    }
  }
  std::vector<double> ctc(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    const double* cm = c.row(m).data();
    for (std::size_t i = 0; i < n; ++i) ctc[i] += cm[i] * cm[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = sigmoid(state.f_hat[i]);
    const double third = -pi * (1.0 - pi) * (1.0 - 2.0 * pi);
    s2[i] = 0.5 * (k(i, i) - ctc[i]) * third;
  }

  const auto rks2 = multiply(r, multiply(k, s2));
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = 0.5 * a[i] + s2[i] - rks2[i];

  Matrix q(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q(i, j) = 0.5 * (a[i] * z[j] + z[i] * a[j]) - 0.5 * r(i, j);

  return tie_gradient(state.kernel, raw_kernel_gradient(state.kernel, state.x_train, q), tying);
}

}  // namespace

std::vector<double> log_marginal_gradient(const LaplaceState& state, Tying tying) {
  return gradient_with_gram(state, gram_symmetric(state.kernel, state.x_train), tying);
}

// ---------------------------------------------------------------------------
// Hyperparameter search

namespace {

constexpr double kRejected = -std::numeric_limits<double>::infinity();

// Evaluates the Laplace evidence for hyperparameter vectors near a base point.
// For additive kernels a perturbation that touches one component (or only the
// bias) updates the base Gram matrix instead of rebuilding all p components.
class EvidenceEvaluator {
 public:
  EvidenceEvaluator(const Matrix& x, std::span<const int> y, const KernelParams& shape,
                    const HyperOptions& options)
      : x_(x), y_(y), shape_(shape), options_(options) {}

  double rebase(std::span<const double> theta) {
    base_params_ = unpack(shape_, theta, options_.tying);
    base_gram_ = gram_symmetric(base_params_, x_);
    try {
      base_state_ = fit_laplace_with_gram(x_, y_, base_params_, base_gram_, base_alpha_,
                                          options_.laplace);
      base_alpha_ = base_state_->grad_at_mode;
      return base_state_->log_marginal;
    } catch (const Error& e) {
      if (e.code() != Errc::kNonConvergence) throw;
      base_state_.reset();
      return kRejected;
    }
  }

  // Gradient at the base point; empty if the base fit was rejected.
  std::vector<double> analytic_gradient() const {
    if (!base_state_) return {};
    return gradient_with_gram(*base_state_, base_gram_, options_.tying);
  }

  double evaluate(std::span<const double> theta) {
    ++evaluations_;
    last_.reset();
    KernelParams params = unpack(shape_, theta, options_.tying);
    Matrix k = incremental_gram(params);
    try {
      auto state = fit_laplace_with_gram(x_, y_, params, k, base_alpha_, options_.laplace);
      const double value = state.log_marginal;
      last_ = Candidate{{theta.begin(), theta.end()}, std::move(params), std::move(k), std::move(state)};
      return value;
    } catch (const Error& e) {
      if (e.code() != Errc::kNonConvergence) throw;
      return kRejected;
    }
  }

  // Makes `theta` the new base, reusing the last evaluation when it was at the
  // same point.
  double adopt(std::span<const double> theta) {
    if (!last_ || !std::equal(theta.begin(), theta.end(), last_->theta.begin(), last_->theta.end())) {
      return rebase(theta);
    }
    base_params_ = std::move(last_->params);
    base_gram_ = std::move(last_->gram);
    base_state_ = std::move(last_->state);
    base_alpha_ = base_state_->grad_at_mode;
    last_.reset();
    return base_state_->log_marginal;
  }

  int evaluations() const { return evaluations_; }

 private:
  Matrix incremental_gram(const KernelParams& params) const {
    const auto* add = std::get_if<AdditiveKernelParams>(&params);
    if (add == nullptr || base_gram_.empty() || add->dim() < 3) {
      return gram_symmetric(params, x_);
    }
    const auto& base = std::get<AdditiveKernelParams>(base_params_);
    std::vector<std::size_t> changed;
    for (std::size_t j = 0; j < add->dim(); ++j) {
      const auto& c = add->components[j];
      const auto& b = base.components[j];
      if (c.log_signal_variance != b.log_signal_variance ||
          c.log_lengthscale != b.log_lengthscale) {
        changed.push_back(j);
      }
    }
    if (changed.size() > 1) return gram_symmetric(params, x_);
    Matrix k = base_gram_;
    const double dbias = add->bias_variance() - base.bias_variance();
    if (dbias != 0.0) {
      for (double& v : k.values()) v += dbias;
    }
    for (std::size_t j : changed) {
      const Matrix before = component_gram(base, j, x_);
      const Matrix after = component_gram(*add, j, x_);
      auto kv = k.values();
      const auto bv = before.values();
      const auto av = after.values();
      for (std::size_t i = 0; i < kv.size(); ++i) kv[i] += av[i] - bv[i];
    }
    return k;
  }

  const Matrix& x_;
  std::span<const int> y_;
  KernelParams shape_;
  HyperOptions options_;
  KernelParams base_params_;
  Matrix base_gram_;
  std::vector<double> base_alpha_;
  std::optional<LaplaceState> base_state_;

  struct Candidate {
    std::vector<double> theta;
    KernelParams params;
    Matrix gram;
    LaplaceState state;
  };
  std::optional<Candidate> last_;
  int evaluations_ = 0;
};

}  // namespace

HyperResult optimize_hyperparameters(const Matrix& x, std::span<const int> y,
                                     const KernelParams& init, int budget,
                                     const HyperOptions& options) {
  if (budget < 1) throw Error(Errc::kInvalidArgument, "gp_classifier: budget must be >= 1");
  const auto [lo, hi] = bounds(init, options.tying, options.box);
  std::vector<double> theta = pack(init, options.tying);
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = std::clamp(theta[i], lo[i], hi[i]);

  EvidenceEvaluator evidence(x, y, init, options);
  double best = evidence.rebase(theta);

  HyperResult result;
  result.initial_log_marginal = best;
  const double h = options.fd_step;
  double step = 1.0;
  int it = 0;
  for (; it < budget && best > kRejected; ++it) {
    std::vector<double> grad(theta.size(), 0.0);
    if (options.gradient == HyperGradient::kAnalytic) {
      grad = evidence.analytic_gradient();
      for (double& g : grad) {
        if (!std::isfinite(g)) g = 0.0;
      }
    } else {
      for (std::size_t i = 0; i < theta.size(); ++i) {
        std::vector<double> up = theta, down = theta;
        up[i] += h;
        down[i] -= h;
        const double fu = evidence.evaluate(up);
        const double fd = evidence.evaluate(down);
        if (std::isfinite(fu) && std::isfinite(fd)) grad[i] = (fu - fd) / (2.0 * h);
      }
    }
    // Project out components that would leave the box.
    double max_abs = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      if ((theta[i] <= lo[i] && grad[i] < 0.0) || (theta[i] >= hi[i] && grad[i] > 0.0)) {
        grad[i] = 0.0;
      }
      max_abs = std::max(max_abs, std::abs(grad[i]));
    }
    if (!(max_abs > 1e-8)) break;

    bool accepted = false;
    for (int ls = 0; ls < 20; ++ls) {
      std::vector<double> cand(theta.size());
      for (std::size_t i = 0; i < theta.size(); ++i) {
        cand[i] = std::clamp(theta[i] + step * grad[i] / max_abs, lo[i], hi[i]);
      }
      const double value = evidence.evaluate(cand);
      if (value > best + 1e-10) {
        theta = std::move(cand);
        best = evidence.adopt(theta);
        step = std::min(2.0 * step, 2.0);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }

  result.params = unpack(init, theta, options.tying);
  result.log_marginal = best;
  result.iterations = it;
  result.evaluations = evidence.evaluations();
  return result;
}

}  // namespace addgp
