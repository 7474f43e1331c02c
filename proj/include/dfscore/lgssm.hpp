#pragma once

#include <span>
#include <string>
#include <vector>

#include "dfscore/derivatives.hpp"
#include "dfscore/state_space.hpp"

namespace dfscore {

/// Free coordinates of the scalar AR(1) parameterization. phi is used as is,
/// the two noise scales through their logarithms.
enum class ArParam { phi, log_sigma_v, log_sigma_w };

std::string to_string(ArParam p);
ArParam ar_param_from_string(const std::string& name);

/// Scalar AR(1) latent process observed with additive noise:
///   x_t = phi x_{t-1} + sigma_v v_t,  y_t = x_t + sigma_w w_t.
/// Parameters not listed in `free` stay at their base values.
struct LgssmSpec {
  double phi = 0.8;
  double sigma_v = 1.0;
  double sigma_w = 1.0;
  bool stationary_init = true;  ///< x_1 ~ N(0, sigma_v^2 / (1 - phi^2)); otherwise N(init_mean, init_var)
  double init_mean = 0.0;
  double init_var = 1.0;
  std::vector<ArParam> free = {ArParam::phi, ArParam::log_sigma_v, ArParam::log_sigma_w};
};

struct ArValues {
  double phi;
  double sigma_v;
  double sigma_w;
};

/// theta <-> (phi, sigma_v, sigma_w) under a spec's free list.
class ArParameterization {
 public:
  explicit ArParameterization(LgssmSpec spec);

  const LgssmSpec& spec() const noexcept { return spec_; }
  std::size_t dim() const noexcept { return spec_.free.size(); }

  /// Throws std::domain_error if a mapped value is non-finite or the
  /// stationary initial law needs |phi| >= 1.
  ArValues values(std::span<const double> theta) const;
  /// Same conditions as values(), without throwing.
  bool admissible(std::span<const double> theta) const;
  Vector theta_for(const ArValues& v) const;
  /// The base values from the spec, as an unconstrained vector.
  Vector base_theta() const { return theta_for({spec_.phi, spec_.sigma_v, spec_.sigma_w}); }
  double initial_variance(const ArValues& v) const;

 private:
  ArValues mapped(std::span<const double> theta) const;

  LgssmSpec spec_;
};

class LinearGaussianModel final : public StateSpaceModel {
 public:
  explicit LinearGaussianModel(LgssmSpec spec) : params_(std::move(spec)) {}

  const ArParameterization& parameterization() const noexcept { return params_; }

  std::size_t param_dim() const override { return params_.dim(); }
  std::size_t state_dim() const override { return 1; }
  std::size_t obs_dim() const override { return 1; }
  bool admissible(std::span<const double> theta) const override { return params_.admissible(theta); }
  void sample_initial(std::span<const double> theta, Rng& rng, std::span<double> x) const override;
  void sample_transition(std::span<const double> x_prev, std::span<const double> theta, Rng& rng,
                         std::span<double> x) const override;
  double obs_log_density(std::span<const double> y, std::span<const double> x,
                         std::span<const double> theta) const override;
  void sample_observation(std::span<const double> x, std::span<const double> theta, Rng& rng,
                          std::span<double> y) const override;

 private:
  ArParameterization params_;
};

/// Sample-only demo: same parameterization, but the state shock is the
/// difference of two log-normal variables,
///   x_t = phi x_{t-1} + sigma_v (exp(a/2) - exp(b/2)),  a, b ~ N(0, 1),
/// whose density is never written down anywhere. x_1 ~ N(0, 1), so the
/// spec's initial law is ignored and any finite phi is admissible.
class LognormalShockModel final : public StateSpaceModel {
 public:
  explicit LognormalShockModel(LgssmSpec spec) : params_(without_stationary(std::move(spec))) {}

  const ArParameterization& parameterization() const noexcept { return params_; }

  std::size_t param_dim() const override { return params_.dim(); }
  std::size_t state_dim() const override { return 1; }
  std::size_t obs_dim() const override { return 1; }
  bool admissible(std::span<const double> theta) const override { return params_.admissible(theta); }
  void sample_initial(std::span<const double> theta, Rng& rng, std::span<double> x) const override;
  void sample_transition(std::span<const double> x_prev, std::span<const double> theta, Rng& rng,
                         std::span<double> x) const override;
  double obs_log_density(std::span<const double> y, std::span<const double> x,
                         std::span<const double> theta) const override;
  void sample_observation(std::span<const double> x, std::span<const double> theta, Rng& rng,
                          std::span<double> y) const override;

 private:
  static LgssmSpec without_stationary(LgssmSpec spec) {
    spec.stationary_init = false;
    return spec;
  }

  ArParameterization params_;
};

/// Exact log-likelihood by the prediction-error decomposition.
double kalman_loglik(const LinearGaussianModel& model, const Vector& theta, const ObservationSequence& y);

/// Score and observed information of the exact Kalman log-likelihood via
/// Richardson-extrapolated central differences. accuracy_warning is set when
/// the extrapolation discrepancy exceeds steps.warn_threshold.
DerivativeOracle kalman_score_oim_oracle(const LinearGaussianModel& model, const Vector& theta,
                                         const ObservationSequence& y, const RichardsonSteps& steps = {});

}  // namespace dfscore
