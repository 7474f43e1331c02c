#pragma once

#include <cstddef>
#include <span>

#include "dfscore/types.hpp"

namespace dfscore {

struct WeightSummary {
  double log_sum;  ///< log sum_i exp(log_weights_i)
  double ess;      ///< 1 / sum_i w_i^2 of the normalized weights
};

/// Self-normalizes log weights with a max shift: w_i = exp(l_i - max) / S.
/// -inf entries get weight exactly 0. Throws DegeneratePosteriorError when
/// every entry is -inf and std::domain_error on NaN or +inf.
WeightSummary normalize_log_weights(std::span<const double> log_weights, std::span<double> weights);

/// Weighted mean and plug-in covariance of `n` points of dimension `dim`
/// stored row-wise in `points` (point k occupies [k*stride, k*stride+dim)).
/// Deviations are taken from `origin` to keep precision when the spread is
/// tiny relative to the location; the returned mean is absolute.
void weighted_moments(std::span<const double> weights, std::span<const double> points,
                      std::size_t dim, std::size_t stride, std::span<const double> origin,
                      Vector& mean, Matrix& covariance);

}  // namespace dfscore
