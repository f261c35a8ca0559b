#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "addgp/gp_classifier.hpp"
#include "addgp/linalg.hpp"
#include "addgp/neural.hpp"

namespace addgp {

enum class ModelKind { kNN, kGP, kNAM, kAGP };

std::string_view model_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct Prediction {
  double probability = 0.5;
  double variance = 0.0;  // latent variance for GP models, p (1 - p) otherwise
};

/// Per-feature contribution means and variances at one input.
struct Attribution {
  std::vector<double> means;
  std::vector<double> variances;
};

struct ModelSettings {
  // GP family
  int initial_budget = 25;
  int retrain_budget = 5;
  Tying tying = Tying::kIndependent;
  double init_log_signal_variance = 0.0;
  double init_log_bias_variance = 0.0;
  // Lengthscale init; for the multidimensional SE kernel log(sqrt(p)) is added.
  double init_log_lengthscale = 0.0;
  // Neural family
  std::vector<std::size_t> nn_hidden{64, 64};
  std::vector<std::size_t> nam_hidden{32, 32};
  TrainConfig train{};
  std::uint64_t seed = 0;
};

/// A classifier that can be (re)fit on a window and queried in batches.
class OnlineModel {
 public:
  virtual ~OnlineModel() = default;

  virtual ModelKind kind() const = 0;
  /// `initial` marks the first fit on the initial window.
  virtual void fit(const Matrix& x, std::span<const int> y, bool initial) = 0;
  virtual std::vector<Prediction> predict(const Matrix& x) const = 0;
  /// Per-feature contributions; only additive models provide them.
  virtual std::optional<Attribution> attribute(std::span<const double> x) const {
    (void)x;
    return std::nullopt;
  }
  /// "latent" or "p(1-p)": the quantity used for uncertainty sampling.
  virtual std::string_view variance_kind() const = 0;
};

std::unique_ptr<OnlineModel> make_model(ModelKind kind, std::size_t features,
                                        const ModelSettings& settings);

}  // namespace addgp
