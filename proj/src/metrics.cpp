#include "addgp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "addgp/error.hpp"

namespace addgp {

namespace {

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(Errc::kDimensionMismatch, "metrics: " + std::to_string(a) + " scores for " +
                                              std::to_string(b) + " labels");
  }
}

}  // namespace

RocResult roc_and_auc(std::span<const double> scores, std::span<const int> labels) {
  require_same_size(scores.size(), labels.size());
  std::size_t pos = 0;
  for (int y : labels) pos += y == 1 ? 1 : 0;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) {
    throw Error(Errc::kSingleClass, "metrics: ROC needs both classes in the labels");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocResult r;
  auto& pts = r.curve.points;
  auto& thr = r.curve.thresholds;
  pts.emplace_back(0.0, 0.0);
  thr.push_back(std::numeric_limits<double>::infinity());
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    while (k < order.size() && scores[order[k]] == s) {
      (labels[order[k]] == 1 ? tp : fp) += 1;
      ++k;
    }
    pts.emplace_back(static_cast<double>(fp) / static_cast<double>(neg),
                     static_cast<double>(tp) / static_cast<double>(pos));
    thr.push_back(s);
  }
  pts.emplace_back(1.0, 1.0);
  thr.push_back(-std::numeric_limits<double>::infinity());

  double auc = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    auc += (pts[k].first - pts[k - 1].first) * (pts[k].second + pts[k - 1].second) * 0.5;
  }
  r.auc = std::clamp(auc, 0.0, 1.0);
  return r;
}

Confusion confusion(std::span<const double> probabilities, std::span<const int> labels,
                    double threshold) {
  require_same_size(probabilities.size(), labels.size());
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = probabilities[i] >= threshold;
    const bool actual = labels[i] == 1;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double f1_score(std::span<const double> probabilities, std::span<const int> labels,
                double threshold) {
  const Confusion c = confusion(probabilities, labels, threshold);
  const double precision = c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double recall = c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double accuracy(std::span<const double> probabilities, std::span<const int> labels,
                double threshold) {
  const Confusion c = confusion(probabilities, labels, threshold);
  const std::size_t n = labels.size();
  return n == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
}

std::vector<double> importance_histogram(std::span<const std::size_t> picks, std::size_t p) {
  std::vector<double> pct(p, 0.0);
  if (picks.empty()) return pct;
  std::vector<std::size_t> counts(p, 0);
  for (std::size_t j : picks) {
    if (j >= p) {
      throw Error(Errc::kIndexOutOfRange, "metrics: pick " + std::to_string(j) + " with p = " +
                                              std::to_string(p));
    }
    ++counts[j];
  }
  for (std::size_t j = 0; j < p; ++j) {
    pct[j] = 100.0 * static_cast<double>(counts[j]) / static_cast<double>(picks.size());
  }
  return pct;
}

double histogram_entropy(std::span<const double> percentages) {
  const double total = std::accumulate(percentages.begin(), percentages.end(), 0.0);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double v : percentages) {
    if (v > 0.0) {
      const double q = v / total;
      h -= q * std::log(q);
    }
  }
  return h;
}

}  // namespace addgp
