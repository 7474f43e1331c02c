#include "dfscore/resample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dfscore {

std::string to_string(ResamplingScheme scheme) {
  return scheme == ResamplingScheme::multinomial ? "multinomial" : "systematic";
}

ResamplingScheme resampling_scheme_from_string(const std::string& name) {
  if (name == "multinomial") return ResamplingScheme::multinomial;
  if (name == "systematic") return ResamplingScheme::systematic;
  throw std::invalid_argument("unknown resampling scheme '" + name + "'");
}

void resample(std::span<const double> weights, ResamplingScheme scheme, Rng& rng,
              std::span<std::size_t> ancestors) {
  if (weights.empty()) throw std::invalid_argument("resample: no weights");
  std::vector<double> cumulative(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
      throw std::invalid_argument("resample: weights must be finite and non-negative");
    total += weights[i];
    cumulative[i] = total;
  }
  if (!(total > 0.0)) throw std::invalid_argument("resample: weights sum to zero");

  // Last index with positive weight; guards against u landing past a
  // cumulative sum that rounding left short of `total`.
  std::size_t last = weights.size() - 1;
  while (weights[last] == 0.0) --last;

  auto locate = [&](double u) {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto idx = static_cast<std::size_t>(it - cumulative.begin());
    return std::min(idx, last);
  };

  const std::size_t n = ancestors.size();
  if (scheme == ResamplingScheme::multinomial) {
    for (std::size_t k = 0; k < n; ++k) ancestors[k] = locate(rng.uniform() * total);
  } else {
    const double step = total / static_cast<double>(n);
    const double start = rng.uniform() * step;
    std::size_t idx = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double u = start + static_cast<double>(k) * step;
      while (idx < last && cumulative[idx] <= u) ++idx;
      ancestors[k] = idx;
    }
  }
}

std::vector<std::size_t> resample(std::span<const double> weights, ResamplingScheme scheme, Rng& rng) {
  std::vector<std::size_t> out(weights.size());
  resample(weights, scheme, rng, out);
  return out;
}

}  // namespace dfscore
