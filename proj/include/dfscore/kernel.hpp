#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dfscore/rng.hpp"
#include "dfscore/types.hpp"

namespace dfscore {

/// Artificial prior placed around the parameter: a centered Gaussian with
/// diagonal covariance diag(sigma_i^2). Scaled by tau when sampling, so the
/// perturbed parameter has covariance tau^2 * Sigma.
///
/// Immutable after construction; safe to share between threads.
class PerturbationKernel {
 public:
  /// Throws std::invalid_argument unless sigmas is non-empty and every entry
  /// is finite and strictly positive.
  explicit PerturbationKernel(std::vector<double> sigmas);

  std::size_t dim() const noexcept { return sigmas_.size(); }
  std::span<const double> sigmas() const noexcept { return sigmas_; }

  /// Sigma_ii.
  double variance(std::size_t i) const;
  Matrix covariance() const;
  Matrix precision() const;

  /// Lambda_i = E[u_i^4] = 3 sigma_i^4 (mesokurtic). Index is 0-based.
  double fourth_moment(std::size_t i) const;

  /// theta + tau * (sigma .* z) for a caller-supplied standard normal z.
  Vector perturb(const Vector& center, double tau, const Vector& z) const;

  /// Same map, written into `out`. No allocation; used on the particle path.
  void perturb_into(std::span<const double> center, double tau, Rng& rng,
                    std::span<double> out) const;

 private:
  std::vector<double> sigmas_;
};

PerturbationKernel make_gaussian_kernel(std::vector<double> sigmas);

/// Draws theta~ = theta + tau * (sigma .* z), z ~ N(0, I) from `rng`.
/// tau = 0 returns the center.
Vector sample_perturbation(const PerturbationKernel& kernel, const Vector& center, double tau,
                           Rng& rng);

Matrix kernel_covariance(const PerturbationKernel& kernel);
double kernel_fourth_moment(const PerturbationKernel& kernel, std::size_t i);

/// Throws std::invalid_argument unless tau is finite and tau > 0 (or tau >= 0
/// when `allow_zero`).
void check_tau(double tau, bool allow_zero = false);

}  // namespace dfscore
