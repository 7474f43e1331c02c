#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dfscore/harness/records.hpp"

namespace dfscore::harness {

struct SlopeFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  std::size_t points = 0;    ///< (x, y) pairs that entered the fit
  std::size_t filtered = 0;  ///< pairs dropped for a non-positive or non-finite x or y
};

/// OLS slope of log y on log x. Needs at least 3 distinct usable x values,
/// otherwise throws std::invalid_argument.
SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y);

enum class XField { tau, h, n_particles, delta };
enum class YAggregate {
  mse,       ///< mean of (estimate - oracle)^2 per x
  abs_bias,  ///< |mean(estimate) - oracle| per x
};

/// Groups successful records with an oracle by x and fits the aggregate.
/// Callers pass records of one method and component.
SlopeFit fit_rate_slope(std::span<const RunRecord> records, XField x, YAggregate y);

}  // namespace dfscore::harness
