#include "addgp/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "addgp/error.hpp"
#include "addgp/gauss_hermite.hpp"

namespace addgp {

namespace {

// Binary cross-entropy from a logit: softplus(z) - y z.
double bce_from_logit(double z, int y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

void require_labels(const Matrix& x, std::span<const int> y) {
  if (x.rows() != y.size()) {
    throw Error(Errc::kDimensionMismatch, "neural: " + std::to_string(y.size()) +
                                              " labels for " + std::to_string(x.rows()) +
                                              " rows");
  }
  for (int v : y) {
    if (v != 0 && v != 1) throw Error(Errc::kDomainError, "neural: labels must be 0/1");
  }
}

// Per-sample forward pass keeping pre-activations for backprop.
struct Trace {
  std::vector<std::vector<double>> act;  // act[0] = input, act[l+1] = layer l output
  std::vector<std::vector<double>> pre;  // pre[l] = layer l pre-activation
};

double forward_trace(const MLPParams& p, std::span<const double> x, Trace* trace) {
  std::vector<double> a(x.begin(), x.end());
  if (trace) {
    trace->act.assign(1, a);
    trace->pre.clear();
  }
  const auto& sizes = p.layer_sizes();
  for (std::size_t l = 0; l < p.layers(); ++l) {
    const std::size_t in = sizes[l], out = sizes[l + 1];
    std::vector<double> z(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = p.bias(l, o);
      const double* w = &p.weight(l, o, 0);
      for (std::size_t i = 0; i < in; ++i) s += w[i] * a[i];
      z[o] = s;
    }
    const bool hidden = l + 1 < p.layers();
    std::vector<double> next = z;
    if (hidden) {
      for (double& v : next) v = std::max(v, 0.0);
    }
    if (trace) {
      trace->pre.push_back(std::move(z));
      trace->act.push_back(next);
    }
    a = std::move(next);
  }
  return a[0];
}

// Accumulates d(loss)/d(params) * scale for one sample given dL/dlogit.
void backward(const MLPParams& p, const Trace& t, double dlogit, std::span<double> grad) {
  const auto& sizes = p.layer_sizes();
  std::vector<double> delta{dlogit};
  // Offsets mirror MLPParams layout: weights then biases per layer.
  std::vector<std::size_t> w_off(p.layers()), b_off(p.layers());
  std::size_t off = 0;
  for (std::size_t l = 0; l < p.layers(); ++l) {
    w_off[l] = off;
    off += sizes[l] * sizes[l + 1];
    b_off[l] = off;
    off += sizes[l + 1];
  }
  for (std::size_t l = p.layers(); l-- > 0;) {
    const std::size_t in = sizes[l], out = sizes[l + 1];
    const auto& a_in = t.act[l];
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      double* g = &grad[w_off[l] + o * in];
      for (std::size_t i = 0; i < in; ++i) g[i] += d * a_in[i];
      grad[b_off[l] + o] += d;
    }
    if (l == 0) break;
    std::vector<double> prev(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* w = &p.weight(l, o, 0);
      for (std::size_t i = 0; i < in; ++i) prev[i] += w[i] * d;
    }
    const auto& z = t.pre[l - 1];
    for (std::size_t i = 0; i < in; ++i) {
      if (!(z[i] > 0.0)) prev[i] = 0.0;
    }
    delta = std::move(prev);
  }
}

std::size_t nam_parameter_count(const NAMParams& p) {
  std::size_t n = 1;
  for (const auto& s : p.subnets) n += s.values().size();
  return n;
}

void require_width(std::size_t got, std::size_t expected) {
  if (got != expected) {
    throw Error(Errc::kDimensionMismatch, "neural: input of length " + std::to_string(got) +
                                              ", expected " + std::to_string(expected));
  }
}

// Adam over a list of parameter buffers.
class Adam {
 public:
  Adam(std::vector<std::span<double>> buffers, const TrainConfig& c) : buffers_(std::move(buffers)), c_(c) {
    std::size_t n = 0;
    for (const auto& b : buffers_) n += b.size();
    m_.assign(n, 0.0);
    v_.assign(n, 0.0);
  }

  void step(std::span<const double> grad) {
    ++t_;
    const double bc1 = 1.0 - std::pow(c_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(c_.beta2, static_cast<double>(t_));
    std::size_t k = 0;
    for (auto& buf : buffers_) {
      for (double& w : buf) {
        const double g = grad[k];
        m_[k] = c_.beta1 * m_[k] + (1.0 - c_.beta1) * g;
        v_[k] = c_.beta2 * v_[k] + (1.0 - c_.beta2) * g * g;
        const double mhat = m_[k] / bc1;
        const double vhat = v_[k] / bc2;
        w -= c_.learning_rate * mhat / (std::sqrt(vhat) + c_.epsilon);
        ++k;
      }
    }
  }

 private:
  std::vector<std::span<double>> buffers_;
  TrainConfig c_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

template <class Params>
std::vector<std::span<double>> buffers_of(Params& p);

template <>
std::vector<std::span<double>> buffers_of(MLPParams& p) {
  return {p.values()};
}

template <>
std::vector<std::span<double>> buffers_of(NAMParams& p) {
  std::vector<std::span<double>> out;
  for (auto& s : p.subnets) out.push_back(s.values());
  out.emplace_back(&p.intercept, 1);
  return out;
}

bool finite_params(const MLPParams& p) { return p.all_finite(); }
bool finite_params(const NAMParams& p) {
  return std::isfinite(p.intercept) &&
         std::all_of(p.subnets.begin(), p.subnets.end(),
                     [](const MLPParams& s) { return s.all_finite(); });
}

template <class Params>
TrainReport train_impl(Params& params, const Matrix& x, std::span<const int> y,
                       const TrainConfig& config) {
  require_labels(x, y);
  if (config.minibatch_size < 1) {
    throw Error(Errc::kInvalidArgument, "neural: minibatch size must be >= 1");
  }
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainReport report;
  report.initial_loss = mean_loss(params, x, y, order);
  if (x.rows() == 0) return report;
  const Params initial = params;

  std::mt19937_64 rng(config.seed);
  Adam adam(buffers_of(params), config);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.minibatch_size) {
      const std::size_t stop = std::min(order.size(), start + config.minibatch_size);
      const std::span<const std::size_t> batch(order.data() + start, stop - start);
      const auto grad = loss_gradient(params, x, y, batch);
      adam.step(grad);
      ++report.steps;
    }
    if (!finite_params(params)) {
      throw Error(Errc::kNonFiniteLoss,
                  "neural: parameters diverged in epoch " + std::to_string(epoch));
    }
  }
  std::sort(order.begin(), order.end());
  report.final_loss = mean_loss(params, x, y, order);
  if (!std::isfinite(report.final_loss)) {
    throw Error(Errc::kNonFiniteLoss, "neural: training loss is not finite");
  }
  if (report.final_loss > report.initial_loss) {
    params = initial;
    report.final_loss = report.initial_loss;
    report.reverted = true;
  }
  return report;
}

}  // namespace

MLPParams::MLPParams(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2 || sizes_.back() != 1) {
    throw Error(Errc::kInvalidArgument, "neural: layer sizes must end in a single output");
  }
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] == 0) throw Error(Errc::kInvalidArgument, "neural: empty layer");
    w_offset_.push_back(off);
    off += sizes_[l] * sizes_[l + 1];
    b_offset_.push_back(off);
    off += sizes_[l + 1];
  }
  values_.assign(off, 0.0);
}

MLPParams MLPParams::random(std::vector<std::size_t> layer_sizes, std::mt19937_64& rng,
                            double first_bias_range) {
  MLPParams p(std::move(layer_sizes));
  for (std::size_t l = 0; l < p.layers(); ++l) {
    const std::size_t in = p.sizes_[l], out = p.sizes_[l + 1];
    const bool hidden = l + 1 < p.layers();
    const double scale = std::sqrt((hidden ? 2.0 : 1.0) / static_cast<double>(in));
    std::normal_distribution<double> normal(0.0, scale);
    for (std::size_t o = 0; o < out; ++o)
      for (std::size_t i = 0; i < in; ++i) p.weight(l, o, i) = normal(rng);
    if (l == 0 && first_bias_range > 0.0) {
      std::uniform_real_distribution<double> uniform(-first_bias_range, first_bias_range);
      for (std::size_t o = 0; o < out; ++o) p.bias(l, o) = uniform(rng);
    }
  }
  return p;
}

bool MLPParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

NAMParams NAMParams::random(std::size_t features, std::span<const std::size_t> hidden,
                            std::mt19937_64& rng) {
  NAMParams p;
  std::vector<std::size_t> sizes{1};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  for (std::size_t j = 0; j < features; ++j) {
    p.subnets.push_back(MLPParams::random(sizes, rng, 1.0));
  }
  return p;
}

MlpOutput mlp_forward(const MLPParams& params, std::span<const double> x) {
  require_width(x.size(), params.input_dim());
  const double z = forward_trace(params, x, nullptr);
  return {sigmoid(z), z};
}

NamOutput nam_forward(const NAMParams& params, std::span<const double> x) {
  require_width(x.size(), params.dim());
  NamOutput out;
  out.contributions.resize(params.dim());
  double z = params.intercept;
  for (std::size_t j = 0; j < params.dim(); ++j) {
    const double xj = x[j];
    out.contributions[j] = forward_trace(params.subnets[j], std::span<const double>(&xj, 1), nullptr);
    z += out.contributions[j];
  }
  out.logit = z;
  out.probability = sigmoid(z);
  return out;
}

double mean_loss(const MLPParams& params, const Matrix& x, std::span<const int> y,
                 std::span<const std::size_t> rows) {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t r : rows) s += bce_from_logit(mlp_forward(params, x.row(r)).logit, y[r]);
  return s / static_cast<double>(rows.size());
}

double mean_loss(const NAMParams& params, const Matrix& x, std::span<const int> y,
                 std::span<const std::size_t> rows) {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t r : rows) s += bce_from_logit(nam_forward(params, x.row(r)).logit, y[r]);
  return s / static_cast<double>(rows.size());
}

std::vector<double> loss_gradient(const MLPParams& params, const Matrix& x,
                                  std::span<const int> y, std::span<const std::size_t> rows) {
  require_width(x.cols(), params.input_dim());
  std::vector<double> grad(params.values().size(), 0.0);
  if (rows.empty()) return grad;
  const double scale = 1.0 / static_cast<double>(rows.size());
  Trace trace;
  for (std::size_t r : rows) {
    const double z = forward_trace(params, x.row(r), &trace);
    backward(params, trace, (sigmoid(z) - y[r]) * scale, grad);
  }
  return grad;
}

std::vector<double> loss_gradient(const NAMParams& params, const Matrix& x,
                                  std::span<const int> y, std::span<const std::size_t> rows) {
  require_width(x.cols(), params.dim());
  std::vector<double> grad(nam_parameter_count(params), 0.0);
  if (rows.empty()) return grad;
  const double scale = 1.0 / static_cast<double>(rows.size());
  std::vector<Trace> traces(params.dim());
  for (std::size_t r : rows) {
    double z = params.intercept;
    for (std::size_t j = 0; j < params.dim(); ++j) {
      const double xj = x(r, j);
      z += forward_trace(params.subnets[j], std::span<const double>(&xj, 1), &traces[j]);
    }
    const double dz = (sigmoid(z) - y[r]) * scale;
    std::size_t off = 0;
    for (std::size_t j = 0; j < params.dim(); ++j) {
      const std::size_t len = params.subnets[j].values().size();
      backward(params.subnets[j], traces[j], dz, std::span<double>(grad.data() + off, len));
      off += len;
    }
    grad[off] += dz;
  }
  return grad;
}

TrainReport train(MLPParams& params, const Matrix& x, std::span<const int> y,
                  const TrainConfig& config) {
  return train_impl(params, x, y, config);
}

TrainReport train(NAMParams& params, const Matrix& x, std::span<const int> y,
                  const TrainConfig& config) {
  return train_impl(params, x, y, config);
}

double variance_estimate(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(Errc::kDomainError, "neural: probability " + std::to_string(p) +
                                        " outside [0, 1]");
  }
  return p * (1.0 - p);
}

std::vector<double> nam_feature_variances(const NAMParams& params, std::span<const double> x) {
  const auto out = nam_forward(params, x);
  std::vector<double> v(out.contributions.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double g = sigmoid(out.contributions[j]);
    v[j] = g * (1.0 - g);
  }
  return v;
}

}  // namespace addgp
