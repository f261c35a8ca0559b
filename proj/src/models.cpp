#include "addgp/models.hpp"

#include <cmath>
#include <random>
#include <string>

#include "addgp/agp.hpp"
#include "addgp/error.hpp"
#include "addgp/gauss_hermite.hpp"

namespace addgp {

namespace {

class GpFamilyModel final : public OnlineModel {
 public:
  GpFamilyModel(ModelKind kind, std::size_t p, const ModelSettings& s) : kind_(kind), s_(s) {
    if (kind == ModelKind::kAGP) {
      kernel_ = AdditiveKernelParams::uniform(
          p, s.init_log_bias_variance, SEParams{s.init_log_signal_variance, s.init_log_lengthscale});
    } else {
      kernel_ = SEParams{s.init_log_signal_variance,
                         s.init_log_lengthscale + 0.5 * std::log(static_cast<double>(p))};
    }
  }

  ModelKind kind() const override { return kind_; }
  std::string_view variance_kind() const override { return "latent"; }

  // Refits from scratch on every window; hyperparameters carry over as the
  // starting point of a shorter search.
  void fit(const Matrix& x, std::span<const int> y, bool initial) override {
    HyperOptions opt;
    opt.tying = s_.tying;
    const int budget = initial ? s_.initial_budget : s_.retrain_budget;
    if (budget > 0) kernel_ = optimize_hyperparameters(x, y, kernel_, budget, opt).params;
    state_ = fit_laplace(x, y, kernel_, opt.laplace);
  }

  std::vector<Prediction> predict(const Matrix& x) const override {
    require_fitted();
    const auto latent = predict_latent(*state_, x);
    std::vector<Prediction> out(latent.size());
    for (std::size_t i = 0; i < latent.size(); ++i) {
      out[i] = {expected_sigmoid(latent[i].mean, latent[i].variance), latent[i].variance};
    }
    return out;
  }

  std::optional<Attribution> attribute(std::span<const double> x) const override {
    if (kind_ != ModelKind::kAGP) return std::nullopt;
    require_fitted();
    auto b = contribution_breakdown(*state_, x);
    return Attribution{std::move(b.feature_means), std::move(b.feature_variances)};
  }

 private:
  void require_fitted() const {
    if (!state_) throw Error(Errc::kInvalidArgument, "models: predict before fit");
  }

  ModelKind kind_;
  ModelSettings s_;
  KernelParams kernel_;
  std::optional<LaplaceState> state_;
};

// Neural models warm-start: each fit continues from the current parameters.
class NeuralModel final : public OnlineModel {
 public:
  NeuralModel(ModelKind kind, std::size_t p, const ModelSettings& s)
      : kind_(kind), s_(s), rng_(s.seed) {
    if (kind == ModelKind::kNAM) {
      nam_ = NAMParams::random(p, s.nam_hidden, rng_);
    } else {
      std::vector<std::size_t> sizes{p};
      sizes.insert(sizes.end(), s.nn_hidden.begin(), s.nn_hidden.end());
      sizes.push_back(1);
      mlp_ = MLPParams::random(sizes, rng_);
    }
  }

  ModelKind kind() const override { return kind_; }
  std::string_view variance_kind() const override { return "p(1-p)"; }

  void fit(const Matrix& x, std::span<const int> y, bool) override {
    TrainConfig c = s_.train;
    c.seed = s_.seed + 0x9e3779b97f4a7c15ULL * (++fits_);
    if (kind_ == ModelKind::kNAM) {
      train(nam_, x, y, c);
    } else {
      train(mlp_, x, y, c);
    }
  }

  std::vector<Prediction> predict(const Matrix& x) const override {
    std::vector<Prediction> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double p = kind_ == ModelKind::kNAM ? nam_forward(nam_, x.row(i)).probability
                                                : mlp_forward(mlp_, x.row(i)).probability;
      out[i] = {p, variance_estimate(p)};
    }
    return out;
  }

  std::optional<Attribution> attribute(std::span<const double> x) const override {
    if (kind_ != ModelKind::kNAM) return std::nullopt;
    auto out = nam_forward(nam_, x);
    return Attribution{std::move(out.contributions), nam_feature_variances(nam_, x)};
  }

 private:
  ModelKind kind_;
  ModelSettings s_;
  std::mt19937_64 rng_;
  MLPParams mlp_;
  NAMParams nam_;
  std::uint64_t fits_ = 0;
};

}  // namespace

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kNN: return "nn";
    case ModelKind::kGP: return "gp";
    case ModelKind::kNAM: return "nam";
    case ModelKind::kAGP: return "agp";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "nn") return ModelKind::kNN;
  if (name == "gp") return ModelKind::kGP;
  if (name == "nam") return ModelKind::kNAM;
  if (name == "agp") return ModelKind::kAGP;
  throw Error(Errc::kInvalidArgument, "models: unknown model '" + std::string(name) +
                                          "' (expected nn, gp, nam or agp)");
}

std::unique_ptr<OnlineModel> make_model(ModelKind kind, std::size_t features,
                                        const ModelSettings& settings) {
  if (features == 0) throw Error(Errc::kInvalidArgument, "models: zero features");
  if (kind == ModelKind::kGP || kind == ModelKind::kAGP) {
    return std::make_unique<GpFamilyModel>(kind, features, settings);
  }
  return std::make_unique<NeuralModel>(kind, features, settings);
}

}  // namespace addgp
