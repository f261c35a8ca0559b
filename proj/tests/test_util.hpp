#pragma once

#include <random>

#include <Eigen/Dense>

#include "addgp/linalg.hpp"

namespace testutil {

inline addgp::Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                                   double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  addgp::Matrix m(rows, cols);
  for (double& v : m.values()) v = u(rng);
  return m;
}

// A^T A + I
inline addgp::Matrix random_spd(std::size_t n, std::mt19937_64& rng) {
  const auto a = random_matrix(n, n, rng);
  auto m = addgp::multiply(addgp::transpose(a), a);
  for (std::size_t i = 0; i < n; ++i) m(i, i) += 1.0;
  return m;
}

inline Eigen::MatrixXd to_eigen(const addgp::Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
  Eigen::VectorXd e(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) e[i] = v[i];
  return e;
}

inline std::vector<int> random_labels(std::size_t n, std::mt19937_64& rng) {
  std::bernoulli_distribution b(0.5);
  std::vector<int> y(n);
  for (auto& v : y) v = b(rng) ? 1 : 0;
  return y;
}

}  // namespace testutil
