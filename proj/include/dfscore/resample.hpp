#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dfscore/rng.hpp"

namespace dfscore {

enum class ResamplingScheme {
  multinomial,  ///< i.i.d. categorical draws
  systematic,   ///< one uniform, stratified inversion
};

std::string to_string(ResamplingScheme scheme);
ResamplingScheme resampling_scheme_from_string(const std::string& name);

/// Fills `ancestors` (its size is the number of offspring) with indices into
/// `weights`. Weights need not be normalized but must be non-negative with a
/// positive sum. Both schemes give each index an expected offspring count of
/// ancestors.size() * w_i / sum(w).
void resample(std::span<const double> weights, ResamplingScheme scheme, Rng& rng,
              std::span<std::size_t> ancestors);

std::vector<std::size_t> resample(std::span<const double> weights, ResamplingScheme scheme, Rng& rng);

}  // namespace dfscore
