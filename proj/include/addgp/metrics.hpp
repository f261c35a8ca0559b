#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace addgp {

/// Points run from (0, 0) to (1, 1) with FPR ascending; thresholds[k] is the
/// score cut (score >= threshold predicts positive) producing points[k].
struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (FPR, TPR)
  std::vector<double> thresholds;
};

struct RocResult {
  RocCurve curve;
  double auc = 0.0;
};

/// Sweeps thresholds over the unique scores plus sentinels above the maximum
/// and below the minimum; AUC by the trapezoidal rule.
RocResult roc_and_auc(std::span<const double> scores, std::span<const int> labels);

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

Confusion confusion(std::span<const double> probabilities, std::span<const int> labels,
                    double threshold = 0.5);

/// 2 P R / (P + R) with predictions probability >= threshold; 0 when P + R = 0.
double f1_score(std::span<const double> probabilities, std::span<const int> labels,
                double threshold = 0.5);

double accuracy(std::span<const double> probabilities, std::span<const int> labels,
                double threshold = 0.5);

/// percentage[j] = 100 * count(j) / |picks|; all zeros for no picks.
std::vector<double> importance_histogram(std::span<const std::size_t> picks, std::size_t p);

/// Shannon entropy (nats) of a percentage histogram.
double histogram_entropy(std::span<const double> percentages);

}  // namespace addgp
