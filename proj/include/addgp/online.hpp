#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "addgp/data.hpp"
#include "addgp/linalg.hpp"
#include "addgp/models.hpp"

namespace addgp {

struct Sample {
  std::vector<double> features;
  int label = 0;
  std::uint64_t arrival_index = 0;
};

/// Every labelled sample seen so far, oldest first.
class RollingBuffer {
 public:
  RollingBuffer(std::size_t capacity, double recent_fraction);

  /// Throws InvalidArgument unless arrival_index exceeds the newest one held.
  void insert(Sample s);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  std::size_t capacity() const { return capacity_; }
  double recent_fraction() const { return recent_fraction_; }
  const std::deque<Sample>& samples() const { return samples_; }

 private:
  std::size_t capacity_;
  double recent_fraction_;
  std::deque<Sample> samples_;
};

struct Window {
  Matrix x;
  std::vector<int> y;
  std::vector<std::uint64_t> arrival;  // ascending
};

/// The newest ceil(recent_fraction * capacity) samples plus a uniform draw
/// without replacement from the older ones, min(capacity, size) in total.
Window compose_window(const RollingBuffer& buffer, std::mt19937_64& rng);

/// ceil(fraction * n) indices with the largest variance, descending; ties go
/// to the lower index.
std::vector<std::size_t> acquire(std::span<const double> variances, double fraction);

struct OnlineConfig {
  double window_proportion = 0.2;
  BatchRange batch_range{};
  double al_fraction = 1.0;
  std::uint64_t seed = 0;
  std::size_t retrain_every = 1;
  double recent_fraction = 0.5;
  /// Score each batch before its labels are used instead of the test set.
  bool prequential = false;

  void validate() const;
};

struct StepRecord {
  std::size_t step = 0;  // 0 is the initial fit
  std::vector<double> predictions;
  std::vector<double> variances;
  std::vector<std::size_t> labels_acquired;
  double f1 = 0.0;
  double accuracy = 0.0;
  bool retrained = false;
  double retrain_seconds = 0.0;
  std::size_t window_size = 0;
};

/// ceil(window_proportion * (initial + stream rows)).
std::size_t window_capacity(const StreamSplit& split, double window_proportion);

/// Fits on the initial window, then for each batch: predict, score, acquire
/// labels, insert them and retrain on a freshly composed window every
/// retrain_every batches. Returns the initial record followed by one per batch.
std::vector<StepRecord> run_online(OnlineModel& model, const StreamSplit& split,
                                   const OnlineConfig& config);

}  // namespace addgp
