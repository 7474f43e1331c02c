#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dfscore/lgssm.hpp"
#include "dfscore/resample.hpp"
#include "dfscore/types.hpp"

namespace dfscore::harness {

enum class ModelKind { gaussian, poisson, quartic, lgssm, lognormal_shock };

enum class Estimator { is_score, is_oim, fd_score, fd_oim, smc_score, smc_oim, quad_score, quad_oim, oracle };

enum class LoglikSource { kalman, smc };

std::string to_string(ModelKind kind);
std::string to_string(Estimator estimator);
Estimator estimator_from_string(const std::string& name);

bool is_score_kind(Estimator e);
bool is_state_space(ModelKind kind);

/// Parsed experiment configuration. See configs/README.md for the file format.
struct ExperimentConfig {
  // [model]
  ModelKind model = ModelKind::gaussian;
  Vector theta;
  std::vector<double> y;       ///< gaussian / poisson observations, one per coordinate
  std::vector<double> obs_sd;  ///< gaussian observation scales
  LgssmSpec ar;                ///< lgssm / lognormal-shock

  // [data]
  std::size_t horizon = 0;
  Vector true_theta;
  std::uint64_t data_seed = 0;
  std::string data_path;
  LoglikSource loglik = LoglikSource::kalman;
  std::size_t loglik_particles = 1000;

  // [estimators]
  std::vector<Estimator> estimators;
  std::vector<double> kernel_sigmas;
  ResamplingScheme resampling = ResamplingScheme::multinomial;
  std::optional<double> ess_trigger;

  // [grid]
  std::vector<double> tau;
  std::vector<std::size_t> n;
  std::vector<std::size_t> lag;
  std::vector<double> h;
  std::optional<double> tau_exponent;  ///< tau = tau_scale * n^-tau_exponent when set
  double tau_scale = 1.0;
  std::optional<double> h_exponent;    ///< h = h_scale * n^-h_exponent when set
  double h_scale = 1.0;

  // [run]
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool timing = false;

  std::size_t dim() const { return static_cast<std::size_t>(theta.size()); }
};

/// Parses and validates. Throws ConfigError naming the offending
/// `section.key` on unknown keys, malformed values or failed invariants.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

}  // namespace dfscore::harness
