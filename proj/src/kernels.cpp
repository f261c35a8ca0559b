#include "addgp/kernels.hpp"

#include <algorithm>
#include <string>

namespace addgp {

namespace {

void require_same_length(std::span<const double> x, std::span<const double> x2,
                         std::size_t expected) {
  if (x.size() != expected || x2.size() != expected) {
    throw Error(Errc::kDimensionMismatch, "kernels: inputs of length " +
                                              std::to_string(x.size()) + " and " +
                                              std::to_string(x2.size()) + ", expected " +
                                              std::to_string(expected));
  }
}

// Hyperparameters with the exponentials hoisted out of the pairwise loops.
struct SECompiled {
  double signal_variance;
  double inv_two_l2;

  explicit SECompiled(const SEParams& p)
      : signal_variance(p.signal_variance()),
        inv_two_l2(1.0 / (2.0 * p.lengthscale() * p.lengthscale())) {}

  double operator()(double sq_dist) const { return signal_variance * std::exp(-sq_dist * inv_two_l2); }
};

struct SEEvaluator {
  SECompiled se;
  double operator()(std::span<const double> x, std::span<const double> x2) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - x2[i];
      s += d * d;
    }
    return se(s);
  }
};

struct AdditiveEvaluator {
  double bias;
  std::vector<SECompiled> components;

  explicit AdditiveEvaluator(const AdditiveKernelParams& p) : bias(p.bias_variance()) {
    components.reserve(p.dim());
    for (const auto& c : p.components) components.emplace_back(c);
  }

  double operator()(std::span<const double> x, std::span<const double> x2) const {
    double s = bias;
    for (std::size_t j = 0; j < components.size(); ++j) {
      const double d = x[j] - x2[j];
      s += components[j](d * d);
    }
    return s;
  }
};

template <class Fn>
Matrix dispatch_gram(const KernelParams& params, const Matrix& x, Fn&& fn) {
  if (const auto* add = std::get_if<AdditiveKernelParams>(&params)) {
    if (x.cols() != add->dim()) {
      throw Error(Errc::kDimensionMismatch,
                  "kernels: additive kernel has " + std::to_string(add->dim()) +
                      " components, inputs have " + std::to_string(x.cols()) + " columns");
    }
    return fn(AdditiveEvaluator(*add));
  }
  return fn(SEEvaluator{SECompiled(std::get<SEParams>(params))});
}

}  // namespace

AdditiveKernelParams AdditiveKernelParams::uniform(std::size_t p, double log_bias_variance,
                                                   SEParams component) {
  return AdditiveKernelParams{log_bias_variance, std::vector<SEParams>(p, component)};
}

double se_eval(const SEParams& params, std::span<const double> x, std::span<const double> x2) {
  require_same_length(x, x2, x.size());
  return SEEvaluator{SECompiled(params)}(x, x2);
}

double se_eval_scalar(const SEParams& params, double a, double b) {
  const double d = a - b;
  return SECompiled(params)(d * d);
}

double additive_eval(const AdditiveKernelParams& params, std::span<const double> x,
                     std::span<const double> x2) {
  require_same_length(x, x2, params.dim());
  return AdditiveEvaluator(params)(x, x2);
}

double kernel_eval(const KernelParams& params, std::span<const double> x,
                   std::span<const double> x2) {
  return std::visit(
      [&](const auto& p) {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, SEParams>) {
          return se_eval(p, x, x2);
        } else {
          return additive_eval(p, x, x2);
        }
      },
      params);
}

double prior_variance(const KernelParams& params) {
  if (const auto* add = std::get_if<AdditiveKernelParams>(&params)) {
    double s = add->bias_variance();
    for (const auto& c : add->components) s += c.signal_variance();
    return s;
  }
  return std::get<SEParams>(params).signal_variance();
}

std::size_t input_dim(const KernelParams& params) {
  if (const auto* add = std::get_if<AdditiveKernelParams>(&params)) return add->dim();
  return 0;
}

Matrix gram(const KernelParams& params, const Matrix& x, const Matrix& x2) {
  detail::require_same_cols(x, x2);
  return dispatch_gram(params, x, [&](const auto& k) { return gram(k, x, x2); });
}

Matrix gram_symmetric(const KernelParams& params, const Matrix& x) {
  return dispatch_gram(params, x, [&](const auto& k) { return gram_symmetric(k, x); });
}

std::vector<double> component_cross(const AdditiveKernelParams& params, std::size_t j,
                                    const Matrix& x, std::span<const double> xstar) {
  if (j >= params.dim()) {
    throw Error(Errc::kIndexOutOfRange, "kernels: component " + std::to_string(j) + " of " +
                                            std::to_string(params.dim()));
  }
  if (x.cols() != params.dim() || xstar.size() != params.dim()) {
    throw Error(Errc::kDimensionMismatch, "kernels: component_cross input width mismatch");
  }
  const SECompiled se(params.components[j]);
  std::vector<double> v(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double d = x(i, j) - xstar[j];
    v[i] = se(d * d);
  }
  return v;
}

Matrix component_gram(const AdditiveKernelParams& params, std::size_t j, const Matrix& x) {
  if (j >= params.dim()) {
    throw Error(Errc::kIndexOutOfRange, "kernels: component " + std::to_string(j) + " of " +
                                            std::to_string(params.dim()));
  }
  const SECompiled se(params.components[j]);
  const std::size_t n = x.rows();
  Matrix out(n, n);
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const auto r = static_cast<std::size_t>(i);
    for (std::size_t k = r; k < n; ++k) {
      const double d = x(r, j) - x(k, j);
      out(r, k) = se(d * d);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < i; ++k) out(i, k) = out(k, i);
  return out;
}

std::vector<double> pack(const KernelParams& params, Tying tying) {
  if (const auto* se = std::get_if<SEParams>(&params)) {
    return {se->log_signal_variance, se->log_lengthscale};
  }
  const auto& add = std::get<AdditiveKernelParams>(params);
  std::vector<double> theta{add.log_bias_variance};
  switch (tying) {
    case Tying::kIndependent:
      for (const auto& c : add.components) {
        theta.push_back(c.log_signal_variance);
        theta.push_back(c.log_lengthscale);
      }
      break;
    case Tying::kSharedLengthscale:
      for (const auto& c : add.components) theta.push_back(c.log_signal_variance);
      theta.push_back(add.components.empty() ? 0.0 : add.components.front().log_lengthscale);
      break;
    case Tying::kSharedAll: {
      const SEParams first = add.components.empty() ? SEParams{} : add.components.front();
      theta.push_back(first.log_signal_variance);
      theta.push_back(first.log_lengthscale);
      break;
    }
  }
  return theta;
}

KernelParams unpack(const KernelParams& shape, std::span<const double> theta, Tying tying) {
  const std::size_t expected = pack(shape, tying).size();
  if (theta.size() != expected) {
    throw Error(Errc::kDimensionMismatch, "kernels: hyperparameter vector of length " +
                                              std::to_string(theta.size()) + ", expected " +
                                              std::to_string(expected));
  }
  if (std::holds_alternative<SEParams>(shape)) return SEParams{theta[0], theta[1]};
  const std::size_t p = std::get<AdditiveKernelParams>(shape).dim();
  AdditiveKernelParams out;
  out.log_bias_variance = theta[0];
  out.components.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    switch (tying) {
      case Tying::kIndependent:
        out.components[j] = {theta[1 + 2 * j], theta[2 + 2 * j]};
        break;
      case Tying::kSharedLengthscale:
        out.components[j] = {theta[1 + j], theta[1 + p]};
        break;
      case Tying::kSharedAll:
        out.components[j] = {theta[1], theta[2]};
        break;
    }
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> bounds(const KernelParams& shape,
                                                           Tying tying,
                                                           const HyperBounds& box) {
  const std::size_t n = pack(shape, tying).size();
  std::vector<double> lo(n), hi(n);
  auto set = [&](std::size_t i, double a, double b) {
    lo[i] = a;
    hi[i] = b;
  };
  const auto sv = [&](std::size_t i) {
    set(i, box.log_signal_variance_min, box.log_signal_variance_max);
  };
  const auto ls = [&](std::size_t i) { set(i, box.log_lengthscale_min, box.log_lengthscale_max); };
  if (std::holds_alternative<SEParams>(shape)) {
    sv(0);
    ls(1);
    return {lo, hi};
  }
  const std::size_t p = std::get<AdditiveKernelParams>(shape).dim();
  set(0, box.log_bias_variance_min, box.log_bias_variance_max);
  switch (tying) {
    case Tying::kIndependent:
      for (std::size_t j = 0; j < p; ++j) {
        sv(1 + 2 * j);
        ls(2 + 2 * j);
      }
      break;
    case Tying::kSharedLengthscale:
      for (std::size_t j = 0; j < p; ++j) sv(1 + j);
      ls(1 + p);
      break;
    case Tying::kSharedAll:
      sv(1);
      ls(2);
      break;
  }
  return {lo, hi};
}

}  // namespace addgp
