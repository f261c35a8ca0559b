#include "addgp/online.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iterator>
#include <numeric>
#include <string>

#include "addgp/error.hpp"
#include "addgp/metrics.hpp"

namespace addgp {

RollingBuffer::RollingBuffer(std::size_t capacity, double recent_fraction)
    : capacity_(capacity), recent_fraction_(recent_fraction) {
  if (capacity == 0) throw Error(Errc::kInvalidArgument, "online: buffer capacity must be positive");
  if (!(recent_fraction >= 0.0 && recent_fraction <= 1.0)) {
    throw Error(Errc::kInvalidArgument, "online: recent_fraction must lie in [0, 1]");
  }
}

void RollingBuffer::insert(Sample s) {
  if (!samples_.empty() && s.arrival_index <= samples_.back().arrival_index) {
    throw Error(Errc::kInvalidArgument,
                "online: arrival index " + std::to_string(s.arrival_index) +
                    " does not follow " + std::to_string(samples_.back().arrival_index));
  }
  if (!samples_.empty() && s.features.size() != samples_.front().features.size()) {
    throw Error(Errc::kDimensionMismatch, "online: sample width differs from buffer");
  }
  samples_.push_back(std::move(s));
}

Window compose_window(const RollingBuffer& buffer, std::mt19937_64& rng) {
  if (buffer.empty()) throw Error(Errc::kEmptyBuffer, "online: cannot compose a window from an empty buffer");
  const auto& all = buffer.samples();
  const std::size_t n = all.size();
  const std::size_t cap = buffer.capacity();

  std::vector<std::size_t> picked;
  if (n <= cap) {
    picked.resize(n);
    std::iota(picked.begin(), picked.end(), std::size_t{0});
  } else {
    const std::size_t recent = std::min(cap, fraction_ceil(buffer.recent_fraction(), cap));
    const std::size_t older = n - recent;
    std::vector<std::size_t> history(older);
    std::iota(history.begin(), history.end(), std::size_t{0});
    std::sample(history.begin(), history.end(), std::back_inserter(picked), cap - recent, rng);
    for (std::size_t i = older; i < n; ++i) picked.push_back(i);
  }

  Window w;
  w.x = Matrix(0, all.front().features.size());
  w.y.reserve(picked.size());
  w.arrival.reserve(picked.size());
  for (std::size_t i : picked) {
    w.x.append_row(all[i].features);
    w.y.push_back(all[i].label);
    w.arrival.push_back(all[i].arrival_index);
  }
  return w;
}

std::vector<std::size_t> acquire(std::span<const double> variances, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(Errc::kInvalidArgument, "online: acquisition fraction must lie in (0, 1]");
  }
  for (double v : variances) {
    if (!std::isfinite(v)) throw Error(Errc::kDomainError, "online: non-finite variance");
  }
  std::vector<std::size_t> order(variances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return variances[a] > variances[b]; });
  order.resize(std::min(order.size(), fraction_ceil(fraction, variances.size())));
  return order;
}

void OnlineConfig::validate() const {
  if (!(window_proportion > 0.0 && window_proportion <= 1.0)) {
    throw Error(Errc::kInvalidArgument, "online: window_proportion must lie in (0, 1]");
  }
  if (!(al_fraction > 0.0 && al_fraction <= 1.0)) {
    throw Error(Errc::kInvalidArgument, "online: al_fraction must lie in (0, 1]");
  }
  if (!(recent_fraction >= 0.0 && recent_fraction <= 1.0)) {
    throw Error(Errc::kInvalidArgument, "online: recent_fraction must lie in [0, 1]");
  }
  if (batch_range.min < 1 || batch_range.min > batch_range.max) {
    throw Error(Errc::kInvalidArgument, "online: batch range must satisfy 1 <= min <= max");
  }
  if (retrain_every < 1) throw Error(Errc::kInvalidArgument, "online: retrain_every must be >= 1");
}

std::size_t window_capacity(const StreamSplit& split, double window_proportion) {
  return std::max<std::size_t>(1, fraction_ceil(window_proportion, split.training_rows()));
}

namespace {

std::vector<double> probabilities(const std::vector<Prediction>& preds) {
  std::vector<double> p(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) p[i] = preds[i].probability;
  return p;
}

// Runs `fn` and re-raises library errors with the step and model attached.
template <class Fn>
auto at_step(std::size_t step, const OnlineModel& model, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), "online step " + std::to_string(step) + " (" +
                              std::string(model_name(model.kind())) + "): " + e.what());
  }
}

}  // namespace

std::vector<StepRecord> run_online(OnlineModel& model, const StreamSplit& split,
                                   const OnlineConfig& config) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  std::mt19937_64 rng(config.seed);
  RollingBuffer buffer(window_capacity(split, config.window_proportion), config.recent_fraction);

  std::uint64_t arrival = 0;
  for (std::size_t i = 0; i < split.initial.size(); ++i) {
    const auto row = split.initial.features.row(i);
    buffer.insert({{row.begin(), row.end()}, split.initial.labels[i], arrival++});
  }

  std::vector<double> test_probs;
  auto score_test = [&](StepRecord& rec) {
    if (split.test.size() == 0) return;
    test_probs = probabilities(model.predict(split.test.features));
    rec.f1 = f1_score(test_probs, split.test.labels);
    rec.accuracy = accuracy(test_probs, split.test.labels);
  };

  auto retrain = [&](StepRecord& rec, bool initial) {
    const Window w = compose_window(buffer, rng);
    const auto t0 = Clock::now();
    model.fit(w.x, w.y, initial);
    rec.retrain_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    rec.retrained = true;
    rec.window_size = w.y.size();
  };

  std::vector<StepRecord> records;
  records.reserve(split.batches.size() + 1);
  {
    StepRecord rec;
    at_step(0, model, [&] {
      retrain(rec, true);
      score_test(rec);
      return 0;
    });
    records.push_back(std::move(rec));
  }

  for (std::size_t b = 0; b < split.batches.size(); ++b) {
    const std::size_t step = b + 1;
    const Dataset& batch = split.batches[b];
    StepRecord rec;
    rec.step = step;
    rec.window_size = records.back().window_size;
    at_step(step, model, [&] {
      const auto preds = model.predict(batch.features);
      rec.predictions = probabilities(preds);
      rec.variances.resize(preds.size());
      for (std::size_t i = 0; i < preds.size(); ++i) rec.variances[i] = preds[i].variance;
      if (config.prequential) {
        rec.f1 = f1_score(rec.predictions, batch.labels);
        rec.accuracy = accuracy(rec.predictions, batch.labels);
      }

      rec.labels_acquired = acquire(rec.variances, config.al_fraction);
      // Insert in stream order so arrival indices follow the batch layout.
      std::vector<std::size_t> chosen = rec.labels_acquired;
      std::sort(chosen.begin(), chosen.end());
      for (std::size_t i : chosen) {
        const auto row = batch.features.row(i);
        buffer.insert({{row.begin(), row.end()}, batch.labels[i], arrival + i});
      }
      arrival += batch.size();

      if (step % config.retrain_every == 0) retrain(rec, false);
      if (!config.prequential) {
        if (rec.retrained || test_probs.empty()) {
          score_test(rec);
        } else {
          rec.f1 = records.back().f1;
          rec.accuracy = records.back().accuracy;
        }
      }
      return 0;
    });
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace addgp
