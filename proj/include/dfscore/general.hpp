#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "dfscore/kernel.hpp"
#include "dfscore/rng.hpp"
#include "dfscore/types.hpp"

namespace dfscore {

/// theta -> log-likelihood. May consume randomness when the caller plugs in a
/// Monte Carlo estimate; must be deterministic given (theta, stream state).
/// Returns a finite value or -infinity.
using LogLikelihood = std::function<double(const Vector& theta, Rng& rng)>;

struct GeneralModel {
  std::size_t dim = 0;
  LogLikelihood log_likelihood;
};

/// Moments of the artificial posterior of the perturbed parameter.
struct PosteriorMoments {
  Vector mean;
  Matrix covariance;
  double ess = 0.0;
  std::size_t n = 0;
};

/// Self-normalized importance sampling with the artificial prior as proposal.
///
/// Draw i consumes the stream as: d normals for the perturbation, then
/// whatever the log-likelihood consumes. Requires n >= 2 and matching
/// dimensions; throws DegeneratePosteriorError if every draw has l = -inf.
PosteriorMoments posterior_moments_is(const GeneralModel& model, const Vector& theta, double tau,
                                      const PerturbationKernel& kernel, std::size_t n, Rng& rng);

/// tau^-2 Sigma^-1 (mean - theta).
ScoreVector score_general(const PosteriorMoments& moments, const Vector& theta, double tau,
                          const PerturbationKernel& kernel);

/// tau^-4 Sigma^-1 (tau^2 Sigma - covariance) Sigma^-1, symmetrized.
InfoMatrix oim_general(const PosteriorMoments& moments, double tau, const PerturbationKernel& kernel);

/// Central finite-difference configuration. Evaluation k (in a fixed
/// stencil order) runs on the stream derive_seed(seed, k), so all
/// evaluations are independent Monte Carlo estimates when l is noisy.
struct FdConfig {
  double h = 0.0;
  std::uint64_t seed = 0;
};

/// (l(theta + h e_r) - l(theta - h e_r)) / 2h for each r.
ScoreVector fd_score(const LogLikelihood& loglik, const Vector& theta, const FdConfig& config);

/// Negative of the second-difference Hessian: the 3-point stencil on the
/// diagonal, the 4-point cross stencil off it.
InfoMatrix fd_oim(const LogLikelihood& loglik, const Vector& theta, const FdConfig& config);

/// Number of log-likelihood evaluations fd_score / fd_oim make in dimension d.
std::size_t fd_score_evaluations(std::size_t dim);
std::size_t fd_oim_evaluations(std::size_t dim);

struct QuadratureGrid {
  std::size_t points_per_axis = 2001;
  double half_width_sd = 8.0;  ///< grid spans +- this many prior standard deviations
};

/// Exact (up to grid resolution) posterior moments by the trapezoidal rule on
/// a tensor grid. d <= 2 only; the log-likelihood is called with a fixed
/// stream, so it should be deterministic.
PosteriorMoments posterior_moments_quadrature(const GeneralModel& model, const Vector& theta,
                                              double tau, const PerturbationKernel& kernel,
                                              const QuadratureGrid& grid = {});

}  // namespace dfscore
