#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "dfscore/kernel.hpp"
#include "dfscore/resample.hpp"
#include "dfscore/state_space.hpp"
#include "dfscore/types.hpp"

namespace dfscore {

/// Configuration of one run of the bootstrap filter on the perturbed model,
/// where every time step carries its own parameter draw
/// theta~_t = theta + tau * sigma .* z_t, i.i.d. across t.
struct ExtendedFilterConfig {
  Vector theta;
  double tau = 0.0;  ///< 0 is allowed here and gives the plain bootstrap filter
  PerturbationKernel kernel{std::vector<double>{1.0}};
  std::size_t lag = 0;  ///< lag >= T - 1 means full smoothing
  std::size_t n_particles = 0;
  ResamplingScheme resampling = ResamplingScheme::multinomial;
  std::uint64_t seed = 0;
  /// Unset: resample at every step. Set to c in (0, 1]: resample only when
  /// ESS < c * N.
  std::optional<double> ess_trigger;
};

struct CrossCovariance {
  std::size_t s = 0;        ///< earlier time (1-based)
  std::size_t t = 0;        ///< later time, 1 <= t - s <= lag
  std::size_t horizon = 0;  ///< data horizon the estimate conditions on: min(t + lag, T)
  Matrix value;             ///< entry (a, b) = Cov(theta~_s[a], theta~_t[b] | y_{1:horizon})
};

/// Fixed-lag smoothed moments of the per-step parameter draws.
struct FixedLagAccumulator {
  std::size_t horizon = 0;  ///< T
  std::size_t lag = 0;
  std::size_t dim = 0;
  std::vector<Vector> mean;          ///< index t-1: E[theta~_t | y_{1:min(t+lag,T)}]
  std::vector<Matrix> var;           ///< matching covariance of theta~_t
  std::vector<std::size_t> readoff;  ///< index t-1: horizon used, 0 if never read
  std::vector<CrossCovariance> crosscov;  ///< ordered by t, then s
  double loglik = 0.0;  ///< SMC estimate of the perturbed-model log-likelihood

  /// Every t read off once and every pair with 1 <= t - s <= lag present.
  bool complete() const;
};

/// Called after each weighting step with the 1-based step and the
/// normalized weights.
using WeightObserver = std::function<void(std::size_t step, std::span<const double> weights)>;

/// Runs the extended bootstrap filter and reads off fixed-lag moments.
///
/// At step u, after weighting and before resampling, the moments of
/// theta~_{u-lag} and its cross-covariances with theta~_s for
/// u-2*lag <= s < u-lag are read off with the current weights. At u = T the
/// remaining times are flushed at horizon T. Throws ParticleCollapseError
/// if every weight vanishes.
FixedLagAccumulator run_extended_bootstrap(const StateSpaceModel& model, const ObservationSequence& y,
                                           const ExtendedFilterConfig& config,
                                           const WeightObserver& observer = {});

/// tau^-2 Sigma^-1 sum_t (mean_t - theta).
ScoreVector score_ssm(const FixedLagAccumulator& acc, const Vector& theta, double tau,
                      const PerturbationKernel& kernel);

/// -tau^-4 Sigma^-1 { sum_t var_t + sum_{pairs} (C + C^T) - tau^2 T Sigma } Sigma^-1,
/// exactly symmetric.
InfoMatrix oim_ssm(const FixedLagAccumulator& acc, double tau, const PerturbationKernel& kernel);

/// Plain bootstrap-filter estimate of log p(y_{1:T}; theta).
double bootstrap_loglik(const StateSpaceModel& model, const ObservationSequence& y, const Vector& theta,
                        std::size_t n_particles, ResamplingScheme scheme, std::uint64_t seed);

/// `moments`: header `t,component,mean,var_diag`; `crosscov`: header
/// `s,t,i,j,crosscov`. Components are 1-based.
void write_accumulator_csv(const FixedLagAccumulator& acc, std::ostream& moments, std::ostream& crosscov);

}  // namespace dfscore
