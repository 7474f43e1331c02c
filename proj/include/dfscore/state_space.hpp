#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "dfscore/rng.hpp"
#include "dfscore/types.hpp"

namespace dfscore {

/// A state-space model with a latent Markov chain that can only be simulated.
///
/// There is deliberately no transition density in this interface: the
/// estimators built on it never need one. The observation density must be
/// evaluable pointwise. All spans are caller-owned buffers of the sizes
/// reported by param_dim / state_dim / obs_dim. Implementations are
/// immutable and may be shared across threads.
class StateSpaceModel {
 public:
  virtual ~StateSpaceModel() = default;

  virtual std::size_t param_dim() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t obs_dim() const = 0;

  /// False if theta lies outside the model's parameter domain. The extended
  /// filter gives particles carrying such a draw zero weight.
  virtual bool admissible(std::span<const double> /*theta*/) const { return true; }

  /// x_1 ~ nu(. ; theta)
  virtual void sample_initial(std::span<const double> theta, Rng& rng, std::span<double> x) const = 0;

  /// x_t ~ f(. | x_{t-1}; theta)
  virtual void sample_transition(std::span<const double> x_prev, std::span<const double> theta,
                                 Rng& rng, std::span<double> x) const = 0;

  /// log g(y_t | x_t; theta); finite or -inf.
  virtual double obs_log_density(std::span<const double> y, std::span<const double> x,
                                 std::span<const double> theta) const = 0;

  /// y_t ~ g(. | x_t; theta). Only used for data simulation.
  virtual void sample_observation(std::span<const double> x, std::span<const double> theta,
                                  Rng& rng, std::span<double> y) const = 0;
};

/// y_{1:T}, stored row-major (T rows of `dim` values).
class ObservationSequence {
 public:
  ObservationSequence() = default;
  ObservationSequence(std::size_t dim, std::vector<double> values);

  static ObservationSequence scalar(std::vector<double> values) {
    return ObservationSequence(1, std::move(values));
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t length() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
  /// Observation at 0-based index t.
  std::span<const double> at(std::size_t t) const { return {values_.data() + t * dim_, dim_}; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t dim_ = 1;
  std::vector<double> values_;
};

struct SimulatedData {
  std::size_t state_dim = 1;
  std::vector<double> states;  ///< T rows of state_dim values
  ObservationSequence observations;
};

/// Forward simulation of (x_{1:T}, y_{1:T}). Per step the stream is consumed
/// as: state draw, then observation draw. Requires T >= 1.
SimulatedData simulate(const StateSpaceModel& model, const Vector& theta, std::size_t horizon,
                       Rng& rng);

/// CSV with header `t,y` (or `t,y1,...,yk` for k > 1), t starting at 1,
/// shortest round-trip decimal formatting.
void write_observations_csv(const ObservationSequence& obs, std::ostream& out);
ObservationSequence read_observations_csv(std::istream& in);

}  // namespace dfscore
