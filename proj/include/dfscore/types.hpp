#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

namespace dfscore {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct EstimateMeta {
  double tau = 0.0;
  std::size_t n = 0;
  std::string method;
};

/// Estimate of the gradient of the log-likelihood.
struct ScoreVector {
  Vector values;
  EstimateMeta meta;
};

/// Estimate of the observed information matrix (negative Hessian). Producers
/// in this library always return an exactly symmetric matrix.
struct InfoMatrix {
  Matrix values;
  EstimateMeta meta;
};

/// (M + M^T) / 2; the result equals its transpose bit for bit.
inline Matrix symmetrized(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = 0.5 * (m(i, j) + m(j, i));
  return out;
}

}  // namespace dfscore
