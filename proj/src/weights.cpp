#include "dfscore/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dfscore/errors.hpp"

namespace dfscore {

WeightSummary normalize_log_weights(std::span<const double> log_weights, std::span<double> weights) {
  if (weights.size() != log_weights.size())
    throw std::invalid_argument("normalize_log_weights: size mismatch");
  double max_lw = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) {
    if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity())
      throw std::domain_error("log weight is NaN or +inf");
    max_lw = std::max(max_lw, lw);
  }
  if (max_lw == -std::numeric_limits<double>::infinity())
    throw DegeneratePosteriorError("all importance weights are zero");

  double sum = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    weights[i] = std::exp(log_weights[i] - max_lw);
    sum += weights[i];
  }
  const double inv = 1.0 / sum;
  double sum_sq = 0.0;
  for (double& w : weights) {
    w *= inv;
    sum_sq += w * w;
  }
  return {max_lw + std::log(sum), 1.0 / sum_sq};
}

void weighted_moments(std::span<const double> weights, std::span<const double> points,
                      std::size_t dim, std::size_t stride, std::span<const double> origin,
                      Vector& mean, Matrix& covariance) {
  const auto d = static_cast<Eigen::Index>(dim);
  Vector dev_mean = Vector::Zero(d);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double w = weights[k];
    if (w == 0.0) continue;
    const double* p = points.data() + k * stride;
    for (std::size_t i = 0; i < dim; ++i) dev_mean(static_cast<Eigen::Index>(i)) += w * (p[i] - origin[i]);
  }
  covariance = Matrix::Zero(d, d);
  Vector c(d);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double w = weights[k];
    if (w == 0.0) continue;
    const double* p = points.data() + k * stride;
    for (std::size_t i = 0; i < dim; ++i)
      c(static_cast<Eigen::Index>(i)) = (p[i] - origin[i]) - dev_mean(static_cast<Eigen::Index>(i));
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) covariance(i, j) += w * c(i) * c(j);
  }
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < i; ++j) covariance(j, i) = covariance(i, j);
  mean.resize(d);
  for (std::size_t i = 0; i < dim; ++i) mean(static_cast<Eigen::Index>(i)) = origin[i] + dev_mean(static_cast<Eigen::Index>(i));
}

}  // namespace dfscore
