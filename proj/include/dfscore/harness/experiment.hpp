#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dfscore/harness/config.hpp"
#include "dfscore/harness/records.hpp"
#include "dfscore/harness/slope.hpp"
#include "dfscore/state_space.hpp"

namespace dfscore::harness {

/// Which axes a command expands. `estimate` takes the full product of every
/// grid an estimator uses; a sweep expands one axis and pins the others to
/// their first value; `oracle` evaluates only the oracle.
enum class Command { estimate, sweep_tau, sweep_n, sweep_lag, oracle };

struct ExperimentResult {
  std::vector<RunRecord> records;  ///< ordered by run_id
  std::size_t tasks = 0;
  std::size_t failed = 0;
  std::vector<std::string> warnings;

  bool all_failed() const { return tasks > 0 && failed == tasks; }
};

/// Runs every (estimator, grid point, replication) task. Task k of grid
/// point g and replication r gets run_id = g * R + r and the stream
/// derive_seed(base seed, r, g). Grid points are numbered across all
/// estimators in config order. A failing task yields error records and the
/// run goes on.
ExperimentResult run_experiment(const ExperimentConfig& config, Command command = Command::estimate);

/// Observations for a state-space config: read from data.path if set,
/// otherwise simulated at data.true_theta with Rng(data.seed).
ObservationSequence experiment_data(const ExperimentConfig& config);

struct CompareRow {
  std::string method;
  std::size_t i = 1;
  std::optional<std::size_t> j;
  std::optional<double> tau;
  std::optional<double> h;
  std::optional<std::size_t> n_particles;
  std::size_t budget = 0;  ///< likelihood evaluations (times particles, for SMC) per estimate
  std::size_t replications = 0;  ///< successful ones
  double mean_estimate = 0.0;
  std::optional<double> oracle;
  std::optional<double> bias;
  double variance = 0.0;
  std::optional<double> mse;
  std::optional<double> variance_ratio;  ///< FD rows: FD variance / proposed variance
};

struct CompareResult {
  std::vector<CompareRow> rows;
  std::size_t tasks = 0;
  std::size_t failed = 0;
  std::vector<std::string> warnings;

  bool all_failed() const { return tasks > 0 && failed == tasks; }
};

/// Pairs every configured fd-* estimator with its proposed counterpart
/// (smc-* on state-space models, is-* otherwise) at a matched budget and
/// tabulates bias, variance and MSE over the replications. On state-space
/// models the FD likelihood runs max(2, N / evaluations) particles.
CompareResult compare_fd(const ExperimentConfig& config);

inline constexpr const char* kCompareVersionLine = "# dfscore compare-fd v1";
inline constexpr const char* kCompareHeader =
    "method,i,j,tau,h,n_particles,budget,replications,mean_estimate,oracle,bias,variance,mse,variance_ratio";

void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& out);

struct SweepSlope {
  std::string method;
  std::size_t i = 1;
  std::optional<std::size_t> j;
  XField x = XField::tau;
  std::optional<SlopeFit> fit;  ///< empty when the fit was impossible
};

/// One MSE slope per (method, component) along the command's swept axis.
/// FD methods use h on a tau sweep.
std::vector<SweepSlope> sweep_slopes(const std::vector<RunRecord>& records, Command command);

}  // namespace dfscore::harness
