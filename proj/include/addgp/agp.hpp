#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "addgp/gp_classifier.hpp"

namespace addgp {

/// Per-feature latent contributions at one test point. bias_mean plus the
/// feature means reproduces the full latent mean.
struct ContributionBreakdown {
  double bias_mean = 0.0;
  double bias_variance = 0.0;
  std::vector<double> feature_means;
  std::vector<double> feature_variances;
};

struct AgpFitOptions {
  HyperOptions hyper{};
};

/// Optimizes the additive kernel from `init` (budget outer iterations) and
/// fits the Laplace approximation at the result.
LaplaceState fit_agp(const Matrix& x, std::span<const int> y, const AdditiveKernelParams& init,
                     int budget, const AgpFitOptions& options = {});

/// Splits the latent posterior into the bias term and one 1-D component per
/// feature. Variances are marginal per component.
ContributionBreakdown contribution_breakdown(const LaplaceState& state,
                                             std::span<const double> xstar);

/// argmax_j |feature_means[j]|, lowest index on ties. The bias is never picked.
std::size_t top_contributor(const ContributionBreakdown& b);

/// argmax_j feature_variances[j], lowest index on ties.
std::size_t top_variance_feature(const ContributionBreakdown& b);

}  // namespace addgp
