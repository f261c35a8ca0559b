#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "addgp/data.hpp"
#include "addgp/error.hpp"
#include "addgp/metrics.hpp"
#include "addgp/online.hpp"

using namespace addgp;

namespace {

RollingBuffer filled(std::size_t capacity, double recent_fraction, std::size_t n) {
  RollingBuffer b(capacity, recent_fraction);
  for (std::size_t i = 0; i < n; ++i) b.insert({{static_cast<double>(i)}, static_cast<int>(i % 2), i});
  return b;
}

// Records every window it is fit on. Variance is the first feature so the
// acquisition order is predictable; probability is a fixed squash of it.
class RecordingModel : public OnlineModel {
 public:
  ModelKind kind() const override { return ModelKind::kGP; }
  void fit(const Matrix& x, std::span<const int> y, bool initial) override {
    fits.push_back({x.rows(), initial});
    last_x = x;
    last_y.assign(y.begin(), y.end());
  }
  std::vector<Prediction> predict(const Matrix& x) const override {
    if (fail_on_predict && fits.size() >= 2) throw Error(Errc::kNonConvergence, "boom");
    std::vector<Prediction> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      out[i].variance = x(i, 0);
      out[i].probability = 1.0 / (1.0 + std::exp(-x(i, 0)));
    }
    return out;
  }
  std::string_view variance_kind() const override { return "latent"; }

  std::vector<std::pair<std::size_t, bool>> fits;
  Matrix last_x;
  std::vector<int> last_y;
  bool fail_on_predict = false;
};

StreamSplit synthetic_split(std::size_t n, std::uint64_t seed, BatchRange range = {20, 40}) {
  std::mt19937_64 rng(seed);
  return split_stream(make_synthetic(n, 3, seed), 0.2, 0.2, range, rng);
}

}  // namespace

TEST(RollingBuffer, RejectsOutOfOrderAndWidth) {
  RollingBuffer b(5, 0.5);
  b.insert({{1.0}, 0, 3});
  EXPECT_THROW(b.insert({{1.0}, 0, 3}), Error);
  EXPECT_THROW(b.insert({{1.0, 2.0}, 0, 4}), Error);
  EXPECT_THROW(RollingBuffer(0, 0.5), Error);
  EXPECT_THROW(RollingBuffer(3, 1.5), Error);
}

TEST(ComposeWindow, SmallBufferReturnsEverything) {
  std::mt19937_64 rng(1);
  const auto w = compose_window(filled(10, 0.5, 7), rng);
  EXPECT_EQ(w.arrival, (std::vector<std::uint64_t>{0, 1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(w.x.rows(), 7u);
  EXPECT_EQ(w.y[3], 1);
}

TEST(ComposeWindow, RecentPlusUniformHistory) {
  std::mt19937_64 rng(2);
  const auto buf = filled(100, 0.5, 1000);
  const auto w = compose_window(buf, rng);
  ASSERT_EQ(w.arrival.size(), 100u);
  EXPECT_TRUE(std::is_sorted(w.arrival.begin(), w.arrival.end()));
  EXPECT_EQ(std::set<std::uint64_t>(w.arrival.begin(), w.arrival.end()).size(), 100u);
  for (std::size_t i = 50; i < 100; ++i) EXPECT_EQ(w.arrival[i], 950 + (i - 50));
  for (std::size_t i = 0; i < 50; ++i) EXPECT_LT(w.arrival[i], 950u);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(w.x(i, 0), static_cast<double>(w.arrival[i]));

  // The historic draw should cover old data roughly uniformly.
  std::size_t early = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto again = compose_window(buf, rng);
    for (std::size_t i = 0; i < 50; ++i) early += again.arrival[i] < 475 ? 1 : 0;
  }
  EXPECT_NEAR(early / (200.0 * 50.0), 0.5, 0.05);
}

TEST(ComposeWindow, AllRecent) {
  std::mt19937_64 rng(3);
  const auto w = compose_window(filled(10, 1.0, 40), rng);
  ASSERT_EQ(w.arrival.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(w.arrival[i], 30 + i);
}

TEST(ComposeWindow, EmptyBuffer) {
  std::mt19937_64 rng(4);
  try {
    compose_window(RollingBuffer(4, 0.5), rng);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kEmptyBuffer);
  }
}

TEST(Acquire, Examples) {
  EXPECT_EQ(acquire(std::vector<double>{0.1, 0.9, 0.5}, 0.2), (std::vector<std::size_t>{1}));
  EXPECT_EQ(acquire(std::vector<double>{0.1, 0.9, 0.5}, 1.0), (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_EQ(acquire(std::vector<double>{0.3, 0.3, 0.3}, 0.5), (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(acquire(std::vector<double>{}, 0.5).empty());
  EXPECT_THROW(acquire(std::vector<double>{0.1}, 0.0), Error);
  EXPECT_THROW(acquire(std::vector<double>{0.1}, 1.1), Error);
  EXPECT_THROW(acquire(std::vector<double>{NAN}, 0.5), Error);
}

TEST(Acquire, CountAndOrder) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> v(1 + rep * 3);
    for (auto& x : v) x = u(rng);
    const double f = 0.1 + 0.018 * rep;
    const auto a = acquire(v, f);
    EXPECT_EQ(a.size(), static_cast<std::size_t>(std::ceil(f * v.size() - 1e-9)));
    for (std::size_t k = 1; k < a.size(); ++k) EXPECT_GE(v[a[k - 1]], v[a[k]]);
    const double cutoff = v[a.back()];
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (std::find(a.begin(), a.end(), i) == a.end()) {
        EXPECT_LE(v[i], cutoff);
      }
    }
  }
}

TEST(RunOnline, EmptyStreamGivesInitialRecordOnly) {
  StreamSplit s = synthetic_split(200, 1);
  s.batches.clear();
  RecordingModel m;
  const auto r = run_online(m, s, OnlineConfig{});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].step, 0u);
  EXPECT_TRUE(r[0].retrained);
  ASSERT_EQ(m.fits.size(), 1u);
  EXPECT_TRUE(m.fits[0].second);
}

TEST(RunOnline, AcquiresCeilFractionPerBatch) {
  const auto s = synthetic_split(600, 2);
  RecordingModel m;
  OnlineConfig c;
  c.al_fraction = 0.3;
  const auto r = run_online(m, s, c);
  ASSERT_EQ(r.size(), s.batches.size() + 1);
  for (std::size_t b = 0; b < s.batches.size(); ++b) {
    EXPECT_EQ(r[b + 1].labels_acquired.size(), fraction_ceil(0.3, s.batches[b].size()));
    EXPECT_EQ(r[b + 1].labels_acquired, acquire(r[b + 1].variances, 0.3));
    EXPECT_EQ(r[b + 1].predictions.size(), s.batches[b].size());
  }
  const std::size_t cap = window_capacity(s, 0.2);
  EXPECT_EQ(cap, fraction_ceil(0.2, s.training_rows()));
  for (const auto& rec : r) EXPECT_LE(rec.window_size, cap);
}

TEST(RunOnline, FullWindowAndFullLabelsSeeEverything) {
  const auto s = synthetic_split(400, 3);
  RecordingModel m;
  OnlineConfig c;
  c.window_proportion = 1.0;
  c.al_fraction = 1.0;
  run_online(m, s, c);
  ASSERT_EQ(m.last_x.rows(), s.training_rows());
  // Window rows are the initial set then each batch in stream order.
  std::size_t row = 0;
  auto expect_rows = [&](const Dataset& d) {
    for (std::size_t i = 0; i < d.size(); ++i, ++row) {
      for (std::size_t j = 0; j < d.dim(); ++j) ASSERT_EQ(m.last_x(row, j), d.features(i, j));
      ASSERT_EQ(m.last_y[row], d.labels[i]);
    }
  };
  expect_rows(s.initial);
  for (const auto& b : s.batches) expect_rows(b);
}

TEST(RunOnline, RetrainCadenceAndMetricReuse) {
  const auto s = synthetic_split(600, 4);
  ASSERT_GE(s.batches.size(), 4u);
  RecordingModel m;
  OnlineConfig c;
  c.retrain_every = 2;
  const auto r = run_online(m, s, c);
  for (std::size_t k = 1; k < r.size(); ++k) {
    EXPECT_EQ(r[k].retrained, k % 2 == 0) << k;
    if (!r[k].retrained) {
      EXPECT_EQ(r[k].f1, r[k - 1].f1);
      EXPECT_EQ(r[k].retrain_seconds, 0.0);
    }
  }
  EXPECT_EQ(m.fits.size(), 1 + s.batches.size() / 2);
}

TEST(RunOnline, PrequentialScoresTheBatch) {
  const auto s = synthetic_split(500, 5);
  RecordingModel m;
  OnlineConfig c;
  c.prequential = true;
  const auto r = run_online(m, s, c);
  for (std::size_t b = 0; b < s.batches.size(); ++b)
    EXPECT_EQ(r[b + 1].f1, f1_score(r[b + 1].predictions, s.batches[b].labels));
}

TEST(RunOnline, WrapsErrorsWithStepAndModel) {
  const auto s = synthetic_split(300, 6);
  RecordingModel m;
  m.fail_on_predict = true;
  try {
    run_online(m, s, OnlineConfig{});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNonConvergence);
    EXPECT_NE(std::string(e.what()).find("online step 1 (gp)"), std::string::npos) << e.what();
  }
}

TEST(RunOnline, RejectsBadConfig) {
  const auto s = synthetic_split(300, 7);
  RecordingModel m;
  OnlineConfig c;
  c.window_proportion = 0.0;
  EXPECT_THROW(run_online(m, s, c), Error);
  c = OnlineConfig{};
  c.retrain_every = 0;
  EXPECT_THROW(run_online(m, s, c), Error);
}

TEST(RunOnline, DeterministicWithRealModel) {
  const auto s = synthetic_split(250, 8, {30, 50});
  ModelSettings settings;
  settings.initial_budget = 3;
  settings.retrain_budget = 1;
  OnlineConfig c;
  c.al_fraction = 0.5;
  c.seed = 11;
  auto m1 = make_model(ModelKind::kAGP, 3, settings);
  auto m2 = make_model(ModelKind::kAGP, 3, settings);
  const auto a = run_online(*m1, s, c);
  const auto b = run_online(*m2, s, c);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].predictions, b[k].predictions);
    EXPECT_EQ(a[k].labels_acquired, b[k].labels_acquired);
    EXPECT_EQ(a[k].f1, b[k].f1);
  }
}
