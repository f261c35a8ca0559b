#include "addgp/agp.hpp"

#include <cmath>
#include <string>

#include "addgp/error.hpp"

namespace addgp {

namespace {

std::size_t argmax_first(std::span<const double> values, bool absolute) {
  std::size_t best = 0;
  double best_value = -1.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double v = absolute ? std::abs(values[j]) : values[j];
    if (j == 0 || v > best_value) {
      best = j;
      best_value = v;
    }
  }
  return best;
}

}  // namespace

LaplaceState fit_agp(const Matrix& x, std::span<const int> y, const AdditiveKernelParams& init,
                     int budget, const AgpFitOptions& options) {
  if (init.dim() != x.cols()) {
    throw Error(Errc::kDimensionMismatch, "agp: kernel has " + std::to_string(init.dim()) +
                                              " components, data has " +
                                              std::to_string(x.cols()) + " features");
  }
  const auto tuned = optimize_hyperparameters(x, y, init, budget, options.hyper);
  return fit_laplace(x, y, tuned.params, options.hyper.laplace);
}

ContributionBreakdown contribution_breakdown(const LaplaceState& state,
                                             std::span<const double> xstar) {
  const auto* add = std::get_if<AdditiveKernelParams>(&state.kernel);
  if (add == nullptr) {
    throw Error(Errc::kKernelKindMismatch, "agp: state was fitted with a non-additive kernel");
  }
  const std::size_t p = add->dim();
  if (xstar.size() != p) {
    throw Error(Errc::kDimensionMismatch, "agp: test point has " +
                                              std::to_string(xstar.size()) + " features, model has " +
                                              std::to_string(p));
  }
  const std::size_t n = state.size();
  ContributionBreakdown out;
  out.feature_means.resize(p);
  out.feature_variances.resize(p);

  const double k0 = add->bias_variance();
  const std::vector<double> bias_cross(n, k0);
  out.bias_mean = dot(bias_cross, state.grad_at_mode);
  out.bias_variance = posterior_variance_term(state, bias_cross, k0);

  for (std::size_t j = 0; j < p; ++j) {
    const auto v = component_cross(*add, j, state.x_train, xstar);
    out.feature_means[j] = dot(v, state.grad_at_mode);
    out.feature_variances[j] =
        posterior_variance_term(state, v, add->components[j].signal_variance());
  }
  return out;
}

std::size_t top_contributor(const ContributionBreakdown& b) {
  return argmax_first(b.feature_means, true);
}

std::size_t top_variance_feature(const ContributionBreakdown& b) {
  return argmax_first(b.feature_variances, false);
}

}  // namespace addgp
