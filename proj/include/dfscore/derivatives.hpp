#pragma once

#include <functional>

#include "dfscore/types.hpp"

namespace dfscore {

/// Step sizes for the Richardson-extrapolated central differences. Each
/// derivative is computed at h and h/2 and combined as (4 D(h/2) - D(h)) / 3.
struct RichardsonSteps {
  double score_h = 1e-3;
  double hessian_h = 2e-3;
  double warn_threshold = 1e-4;
};

struct DerivativeOracle {
  ScoreVector score;
  InfoMatrix oim;
  double score_error = 0.0;  ///< max |R - D(h/2)| over score components
  double oim_error = 0.0;    ///< same, over Hessian entries
  bool accuracy_warning = false;
};

/// Gradient and negative Hessian of a noise-free function by Richardson
/// extrapolation. Exact (to rounding) on polynomials of degree <= 3.
DerivativeOracle richardson_derivatives(const std::function<double(const Vector&)>& f,
                                        const Vector& theta, const RichardsonSteps& steps = {});

}  // namespace dfscore
