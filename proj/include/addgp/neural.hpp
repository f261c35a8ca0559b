#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "addgp/linalg.hpp"

namespace addgp {

/// Fully connected ReLU network with a single linear output unit. Parameters
/// live in one flat buffer, layer by layer: weights (out x in, row-major)
/// followed by biases.
class MLPParams {
 public:
  MLPParams() = default;
  /// All-zero parameters; layer_sizes = {input, hidden..., 1}.
  explicit MLPParams(std::vector<std::size_t> layer_sizes);

  /// He-normal weights for hidden layers, fan-in scaled output weights, and
  /// first-layer biases uniform in [-first_bias_range, first_bias_range].
  static MLPParams random(std::vector<std::size_t> layer_sizes, std::mt19937_64& rng,
                          double first_bias_range = 0.0);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t layers() const { return sizes_.size() - 1; }
  std::size_t input_dim() const { return sizes_.front(); }

  double& weight(std::size_t layer, std::size_t out, std::size_t in) {
    return values_[w_offset_[layer] + out * sizes_[layer] + in];
  }
  const double& weight(std::size_t layer, std::size_t out, std::size_t in) const {
    return values_[w_offset_[layer] + out * sizes_[layer] + in];
  }
  double& bias(std::size_t layer, std::size_t out) { return values_[b_offset_[layer] + out]; }
  const double& bias(std::size_t layer, std::size_t out) const { return values_[b_offset_[layer] + out]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool all_finite() const;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> w_offset_;
  std::vector<std::size_t> b_offset_;
  std::vector<double> values_;
};

/// Neural additive model: one scalar-to-scalar subnet per feature plus an
/// intercept; logit = intercept + sum_j subnet_j(x_j).
struct NAMParams {
  std::vector<MLPParams> subnets;
  double intercept = 0.0;

  static NAMParams random(std::size_t features, std::span<const std::size_t> hidden,
                          std::mt19937_64& rng);
  std::size_t dim() const { return subnets.size(); }
};

struct MlpOutput {
  double probability = 0.5;
  double logit = 0.0;
};

struct NamOutput {
  double probability = 0.5;
  double logit = 0.0;
  std::vector<double> contributions;
};

MlpOutput mlp_forward(const MLPParams& params, std::span<const double> x);
NamOutput nam_forward(const NAMParams& params, std::span<const double> x);

/// Mean binary cross-entropy over the selected rows, computed from logits.
double mean_loss(const MLPParams& params, const Matrix& x, std::span<const int> y,
                 std::span<const std::size_t> rows);
double mean_loss(const NAMParams& params, const Matrix& x, std::span<const int> y,
                 std::span<const std::size_t> rows);

/// Backprop gradient of mean_loss, laid out like MLPParams::values().
std::vector<double> loss_gradient(const MLPParams& params, const Matrix& x,
                                  std::span<const int> y, std::span<const std::size_t> rows);

/// Backprop gradient of mean_loss for a NAM: subnet buffers concatenated in
/// feature order, intercept last.
std::vector<double> loss_gradient(const NAMParams& params, const Matrix& x,
                                  std::span<const int> y, std::span<const std::size_t> rows);

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 50;
  std::size_t minibatch_size = 32;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  long steps = 0;
  bool reverted = false;  // final loss was worse, initial parameters kept
};

/// Adam on mean binary cross-entropy with seeded minibatch order. If the
/// final training loss ends above the initial one the initial parameters are
/// restored.
TrainReport train(MLPParams& params, const Matrix& x, std::span<const int> y,
                  const TrainConfig& config);
TrainReport train(NAMParams& params, const Matrix& x, std::span<const int> y,
                  const TrainConfig& config);

/// p (1 - p).
double variance_estimate(double p);

/// g_j (1 - g_j) with g_j = sigmoid(contribution_j).
std::vector<double> nam_feature_variances(const NAMParams& params, std::span<const double> x);

}  // namespace addgp
