#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "addgp/error.hpp"
#include "addgp/gauss_hermite.hpp"
#include "addgp/neural.hpp"
#include "test_util.hpp"

using namespace addgp;

namespace {

// Straightforward loops over the accessor API, no shared code with the
// library's forward pass.
double naive_logit(const MLPParams& p, std::span<const double> x) {
  std::vector<double> a(x.begin(), x.end());
  const auto& sizes = p.layer_sizes();
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    std::vector<double> z(sizes[l + 1]);
    for (std::size_t o = 0; o < z.size(); ++o) {
      z[o] = p.bias(l, o);
      for (std::size_t i = 0; i < a.size(); ++i) z[o] += p.weight(l, o, i) * a[i];
      if (l + 2 < sizes.size()) z[o] = std::max(0.0, z[o]);
    }
    a = z;
  }
  return a[0];
}

double relative_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

// A subnet whose output is the constant c.
MLPParams constant_subnet(double c) {
  MLPParams p({1, 4, 1});
  p.bias(1, 0) = c;
  return p;
}

// Random initialisation leaves deeper biases at zero, which can park a ReLU
// exactly on its kink where finite differences are one-sided.
void jitter_biases(MLPParams& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  const auto& sizes = p.layer_sizes();
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    for (std::size_t o = 0; o < sizes[l + 1]; ++o) p.bias(l, o) += u(rng);
}

}  // namespace

TEST(MlpForward, ZeroParameters) {
  const MLPParams p({3, 5, 1});
  const auto out = mlp_forward(p, std::vector<double>{1.0, -2.0, 3.0});
  EXPECT_EQ(out.logit, 0.0);
  EXPECT_EQ(out.probability, 0.5);
}

TEST(MlpForward, SingleLinearLayer) {
  MLPParams p({2, 1});
  p.weight(0, 0, 0) = 1.0;
  p.weight(0, 0, 1) = 1.0;
  const auto out = mlp_forward(p, std::vector<double>{2.0, 3.0});
  EXPECT_EQ(out.logit, 5.0);
  EXPECT_DOUBLE_EQ(out.probability, sigmoid(5.0));
  EXPECT_THROW(mlp_forward(p, std::vector<double>{1.0}), Error);
}

TEST(MlpForward, MatchesNaiveOracle) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = MLPParams::random({4, 7, 5, 1}, rng, 0.5);
    const auto x = testutil::random_matrix(1, 4, rng, -2.0, 2.0);
    EXPECT_NEAR(mlp_forward(p, x.row(0)).logit, naive_logit(p, x.row(0)), 1e-12);
  }
}

TEST(NamForward, ZeroParameters) {
  std::mt19937_64 rng(2);
  NAMParams p;
  p.subnets = {MLPParams({1, 3, 1}), MLPParams({1, 3, 1})};
  const auto out = nam_forward(p, std::vector<double>{0.4, -1.0});
  EXPECT_EQ(out.probability, 0.5);
  EXPECT_EQ(out.contributions, (std::vector<double>{0.0, 0.0}));
}

TEST(NamForward, CancellingSubnets) {
  NAMParams p;
  p.subnets = {constant_subnet(1.0), constant_subnet(-1.0)};
  const auto out = nam_forward(p, std::vector<double>{3.0, 7.0});
  EXPECT_EQ(out.contributions, (std::vector<double>{1.0, -1.0}));
  EXPECT_EQ(out.probability, 0.5);
  EXPECT_THROW(nam_forward(p, std::vector<double>{1.0}), Error);
}

TEST(NamForward, LogitIsInterceptPlusContributions) {
  std::mt19937_64 rng(3);
  const std::vector<std::size_t> hidden{8, 8};
  for (int rep = 0; rep < 20; ++rep) {
    auto p = NAMParams::random(5, hidden, rng);
    p.intercept = 0.37 * rep - 3.0;
    const auto x = testutil::random_matrix(1, 5, rng, -2.0, 2.0);
    const auto out = nam_forward(p, x.row(0));
    double s = p.intercept;
    for (double c : out.contributions) s += c;
    EXPECT_EQ(out.logit, s);
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_EQ(out.contributions[j], naive_logit(p.subnets[j], std::vector<double>{x(0, j)}));
    }
  }
}

TEST(NamForward, ShiftBetweenSubnetAndIntercept) {
  std::mt19937_64 rng(4);
  const std::vector<std::size_t> hidden{6};
  auto p = NAMParams::random(3, hidden, rng);
  auto q = p;
  const std::size_t last = q.subnets[1].layers() - 1;
  q.subnets[1].bias(last, 0) += 2.5;
  q.intercept -= 2.5;
  const auto x = testutil::random_matrix(30, 3, rng, -2.0, 2.0);
  for (std::size_t i = 0; i < 30; ++i)
    EXPECT_NEAR(nam_forward(p, x.row(i)).probability, nam_forward(q, x.row(i)).probability, 1e-12);
}

TEST(Gradient, MlpMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    auto p = MLPParams::random({3, 6, 4, 1}, rng, 0.5);
    jitter_biases(p, rng);
    const auto x = testutil::random_matrix(3, 3, rng, -2.0, 2.0);
    const auto y = testutil::random_labels(3, rng);
    const std::vector<std::size_t> rows{0, 1, 2};
    const auto g = loss_gradient(p, x, y, rows);
    ASSERT_EQ(g.size(), p.values().size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double saved = p.values()[i];
      p.values()[i] = saved + 1e-5;
      const double up = mean_loss(p, x, y, rows);
      p.values()[i] = saved - 1e-5;
      const double dn = mean_loss(p, x, y, rows);
      p.values()[i] = saved;
      EXPECT_LE(relative_error(g[i], (up - dn) / 2e-5), 1e-4) << "parameter " << i;
    }
  }
}

TEST(Gradient, NamMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  const std::vector<std::size_t> hidden{5, 4};
  for (int rep = 0; rep < 5; ++rep) {
    auto p = NAMParams::random(3, hidden, rng);
    for (auto& s : p.subnets) jitter_biases(s, rng);
    p.intercept = 0.3;
    const auto x = testutil::random_matrix(3, 3, rng, -2.0, 2.0);
    const auto y = testutil::random_labels(3, rng);
    const std::vector<std::size_t> rows{0, 1, 2};
    const auto g = loss_gradient(p, x, y, rows);
    std::vector<double*> slots;
    for (auto& s : p.subnets)
      for (double& v : s.values()) slots.push_back(&v);
    slots.push_back(&p.intercept);
    ASSERT_EQ(g.size(), slots.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double saved = *slots[i];
      *slots[i] = saved + 1e-5;
      const double up = mean_loss(p, x, y, rows);
      *slots[i] = saved - 1e-5;
      const double dn = mean_loss(p, x, y, rows);
      *slots[i] = saved;
      EXPECT_LE(relative_error(g[i], (up - dn) / 2e-5), 1e-4) << "parameter " << i;
    }
  }
}

TEST(Train, ZeroLearningRateIsNoOp) {
  std::mt19937_64 rng(7);
  auto p = MLPParams::random({2, 4, 1}, rng);
  const auto before = std::vector<double>(p.values().begin(), p.values().end());
  const auto x = testutil::random_matrix(20, 2, rng);
  const auto y = testutil::random_labels(20, rng);
  TrainConfig c;
  c.learning_rate = 0.0;
  c.epochs = 3;
  train(p, x, y, c);
  EXPECT_TRUE(std::equal(before.begin(), before.end(), p.values().begin()));
}

TEST(Train, SeparableDataReachesPerfectAccuracy) {
  Matrix x(0, 1);
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    const double v = -2.0 + 4.0 * i / 39.0 + (i < 20 ? -0.1 : 0.1);
    x.append_row(std::vector<double>{v});
    y.push_back(i < 20 ? 0 : 1);
  }
  std::mt19937_64 rng(8);
  auto mlp = MLPParams::random({1, 16, 16, 1}, rng);
  const std::vector<std::size_t> hidden{16, 16};
  auto nam = NAMParams::random(1, hidden, rng);
  TrainConfig c;
  c.epochs = 500;
  c.learning_rate = 1e-2;
  const auto r1 = train(mlp, x, y, c);
  const auto r2 = train(nam, x, y, c);
  EXPECT_LE(r1.final_loss, r1.initial_loss);
  EXPECT_LE(r2.final_loss, r2.initial_loss);
  for (std::size_t i = 0; i < 40; ++i) {
    EXPECT_EQ(mlp_forward(mlp, x.row(i)).probability >= 0.5 ? 1 : 0, y[i]);
    EXPECT_EQ(nam_forward(nam, x.row(i)).probability >= 0.5 ? 1 : 0, y[i]);
  }
}

TEST(Train, BitReproducibleAndNeverWorse) {
  std::mt19937_64 rng(9);
  const auto x = testutil::random_matrix(100, 3, rng, -2.0, 2.0);
  const auto y = testutil::random_labels(100, rng);
  std::mt19937_64 r1(10), r2(10);
  auto a = MLPParams::random({3, 8, 1}, r1);
  auto b = MLPParams::random({3, 8, 1}, r2);
  TrainConfig c;
  c.epochs = 5;
  c.seed = 42;
  const auto ra = train(a, x, y, c);
  const auto rb = train(b, x, y, c);
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  EXPECT_EQ(ra.final_loss, rb.final_loss);
  EXPECT_LE(ra.final_loss, ra.initial_loss);
  const std::vector<std::size_t> all = [] {
    std::vector<std::size_t> v(100);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
  }();
  EXPECT_DOUBLE_EQ(ra.final_loss, mean_loss(a, x, y, all));
}

TEST(Train, BlowUpRaisesNonFiniteLoss) {
  std::mt19937_64 rng(11);
  auto p = MLPParams::random({2, 4, 1}, rng);
  const auto x = testutil::random_matrix(20, 2, rng);
  const auto y = testutil::random_labels(20, rng);
  TrainConfig c;
  c.learning_rate = 1e300;
  c.epochs = 5;
  try {
    train(p, x, y, c);
    ADD_FAILURE() << "expected NonFiniteLoss";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNonFiniteLoss);
  }
}

TEST(Train, RejectsBadConfig) {
  MLPParams p({1, 1});
  const Matrix x{{0.0}};
  TrainConfig c;
  c.minibatch_size = 0;
  EXPECT_THROW(train(p, x, std::vector<int>{1}, c), Error);
  EXPECT_THROW(train(p, x, std::vector<int>{3}, TrainConfig{}), Error);
}

TEST(VarianceEstimate, Examples) {
  EXPECT_EQ(variance_estimate(0.5), 0.25);
  EXPECT_EQ(variance_estimate(0.0), 0.0);
  EXPECT_EQ(variance_estimate(1.0), 0.0);
  EXPECT_NEAR(variance_estimate(0.9), 0.09, 1e-15);
  EXPECT_THROW(variance_estimate(1.5), Error);
  EXPECT_THROW(variance_estimate(-0.1), Error);
}

TEST(NamFeatureVariances, Examples) {
  NAMParams p;
  p.subnets = {constant_subnet(0.0), constant_subnet(2.0), constant_subnet(50.0)};
  const auto v = nam_feature_variances(p, std::vector<double>{1.0, 1.0, 1.0});
  EXPECT_EQ(v[0], 0.25);
  EXPECT_NEAR(v[1], sigmoid(2.0) * (1.0 - sigmoid(2.0)), 1e-15);
  EXPECT_NEAR(v[1], 0.104994, 1e-6);
  EXPECT_LT(v[2], 1e-20);
  EXPECT_THROW(nam_feature_variances(p, std::vector<double>{1.0}), Error);
}
