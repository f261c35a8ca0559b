#pragma once

#include <cstddef>
#include <vector>

namespace addgp {

/// Nodes and weights for int exp(-x^2) f(x) dx ~= sum_i w_i f(x_i).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Physicists' Gauss-Hermite rule of the given order, nodes ascending.
GaussHermiteRule gauss_hermite(std::size_t order);

/// The 20-node rule, computed once.
const GaussHermiteRule& gauss_hermite_20();

/// E[sigmoid(f)] for f ~ N(mean, variance) by 20-node Gauss-Hermite quadrature.
/// Zero variance returns sigmoid(mean) exactly.
double expected_sigmoid(double mean, double variance);

double sigmoid(double z);

}  // namespace addgp
