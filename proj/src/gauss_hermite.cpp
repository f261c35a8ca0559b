#include "addgp/gauss_hermite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "addgp/error.hpp"

namespace addgp {

namespace {

// Evaluates the orthonormal Hermite recurrence at x, returning (p_n, p_{n-1}).
std::pair<double, double> hermite_pair(std::size_t n, double x) {
  const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
  double p1 = pim4, p2 = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double p3 = p2;
    p2 = p1;
    const auto jd = static_cast<double>(j);
    p1 = x * std::sqrt(2.0 / jd) * p2 - std::sqrt((jd - 1.0) / jd) * p3;
  }
  return {p1, p2};
}

}  // namespace

GaussHermiteRule gauss_hermite(std::size_t order) {
  if (order == 0) throw Error(Errc::kInvalidArgument, "quadrature: order must be positive");
  const std::size_t n = order;
  const auto nd = static_cast<double>(n);
  const std::size_t half = (n + 1) / 2;
  std::vector<double> x(n), w(n);
  double z = 0.0;
  // Newton iteration from the usual asymptotic initial guesses, largest root first.
  for (std::size_t i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * nd + 1.0) - 1.85575 * std::pow(2.0 * nd + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(nd, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const auto [p1, p2] = hermite_pair(n, z);
      pp = std::sqrt(2.0 * nd) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    const auto [p1, p2] = hermite_pair(n, z);
    pp = std::sqrt(2.0 * nd) * p2;
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  std::reverse(x.begin(), x.end());
  std::reverse(w.begin(), w.end());
  return {x, w};
}

const GaussHermiteRule& gauss_hermite_20() {
  static const GaussHermiteRule rule = gauss_hermite(20);
  return rule;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double expected_sigmoid(double mean, double variance) {
  double p;
  if (variance <= 0.0) {
    p = sigmoid(mean);
  } else {
    const auto& rule = gauss_hermite_20();
    const double scale = std::sqrt(2.0 * variance);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      s += rule.weights[i] * sigmoid(mean + scale * rule.nodes[i]);
    }
    p = s / std::sqrt(std::numbers::pi);
  }
  // Keep the probability strictly inside (0, 1) once the sigmoid saturates.
  constexpr double kTiny = std::numeric_limits<double>::min();
  const double kBelowOne = std::nextafter(1.0, 0.0);
  return std::clamp(p, kTiny, kBelowOne);
}

}  // namespace addgp
