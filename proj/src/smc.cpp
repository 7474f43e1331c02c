#include "dfscore/smc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "dfscore/csv.hpp"
#include "dfscore/errors.hpp"
#include "dfscore/weights.hpp"

namespace dfscore {
namespace {

std::size_t expected_pairs(std::size_t horizon, std::size_t lag) {
  std::size_t n = 0;
  for (std::size_t t = 1; t <= horizon; ++t) n += std::min(lag, t - 1);
  return n;
}

/// Particle storage. Each particle carries its state and a ring buffer of the
/// last `window` parameter draws; slot of time t is (t - 1) % window.
class ParticleCloud {
 public:
  ParticleCloud(std::size_t n, std::size_t state_dim, std::size_t dim, std::size_t window)
      : n_(n), sd_(state_dim), d_(dim), window_(window),
        x_(n * state_dim), hist_(n * window * dim), x_tmp_(x_.size()), hist_tmp_(hist_.size()) {}

  std::span<double> state(std::size_t i) { return {x_.data() + i * sd_, sd_}; }
  std::span<double> draw(std::size_t i, std::size_t t) {
    return {hist_.data() + (i * window_ + slot(t)) * d_, d_};
  }
  /// Row view over all particles' draws at time t (stride window * dim).
  std::span<const double> draws_at(std::size_t t) const {
    return {hist_.data() + slot(t) * d_, hist_.size() - slot(t) * d_};
  }
  std::size_t stride() const { return window_ * d_; }
  std::size_t slot(std::size_t t) const { return (t - 1) % window_; }

  void gather(std::span<const std::size_t> ancestors) {
    const std::size_t row = window_ * d_;
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t a = ancestors[i];
      std::copy_n(x_.data() + a * sd_, sd_, x_tmp_.data() + i * sd_);
      std::copy_n(hist_.data() + a * row, row, hist_tmp_.data() + i * row);
    }
    x_.swap(x_tmp_);
    hist_.swap(hist_tmp_);
  }

 private:
  std::size_t n_, sd_, d_, window_;
  std::vector<double> x_, hist_, x_tmp_, hist_tmp_;
};

}  // namespace

bool FixedLagAccumulator::complete() const {
  if (horizon == 0 || mean.size() != horizon || var.size() != horizon || readoff.size() != horizon)
    return false;
  for (std::size_t h : readoff)
    if (h == 0) return false;
  return crosscov.size() == expected_pairs(horizon, lag);
}

FixedLagAccumulator run_extended_bootstrap(const StateSpaceModel& model, const ObservationSequence& y,
                                           const ExtendedFilterConfig& config,
                                           const WeightObserver& observer) {
  const std::size_t horizon = y.length();
  const std::size_t n = config.n_particles;
  const std::size_t d = model.param_dim();
  const std::size_t lag = config.lag;
  if (horizon < 1) throw std::invalid_argument("extended filter: T must be >= 1");
  if (n < 2) throw std::invalid_argument("extended filter: need at least 2 particles");
  if (y.dim() != model.obs_dim()) throw std::invalid_argument("extended filter: observation dimension mismatch");
  if (static_cast<std::size_t>(config.theta.size()) != d || config.kernel.dim() != d)
    throw std::invalid_argument("extended filter: theta/kernel dimension mismatch");
  check_tau(config.tau, true);
  if (config.ess_trigger && !(*config.ess_trigger > 0.0 && *config.ess_trigger <= 1.0))
    throw std::invalid_argument("extended filter: ess_trigger must lie in (0, 1]");

  // Pairs read at horizon u reach back to u - 2*lag; the window never needs
  // more than T slots.
  const std::size_t window = std::min(2 * std::min(lag, horizon) + 1, horizon);
  ParticleCloud cloud(n, model.state_dim(), d, window);

  FixedLagAccumulator acc;
  acc.horizon = horizon;
  acc.lag = lag;
  acc.dim = d;
  acc.mean.assign(horizon, Vector());
  acc.var.assign(horizon, Matrix());
  acc.readoff.assign(horizon, 0);
  acc.crosscov.reserve(expected_pairs(horizon, lag));

  Rng rng(config.seed);
  const std::span<const double> center{config.theta.data(), d};
  std::vector<double> prev_log_w(n, -std::log(static_cast<double>(n)));
  std::vector<double> log_w(n), w(n);
  std::vector<std::size_t> ancestors(n);
  std::vector<double> prev_state(model.state_dim());

  // Means of theta~_s at the current horizon, cached per read-off batch.
  std::vector<Vector> batch_mean(horizon);
  Matrix scratch;

  auto read_off = [&](std::size_t t_first, std::size_t t_last, std::size_t u) {
    const std::size_t s_first = t_first > lag ? t_first - lag : 1;
    if (u - s_first >= window) throw std::logic_error("extended filter: history window underflow");
    for (std::size_t s = s_first; s <= t_last; ++s)
      weighted_moments(w, cloud.draws_at(s), d, cloud.stride(), center, batch_mean[s - 1], scratch);
    for (std::size_t t = t_first; t <= t_last; ++t) {
      weighted_moments(w, cloud.draws_at(t), d, cloud.stride(), center, acc.mean[t - 1], acc.var[t - 1]);
      acc.readoff[t - 1] = u;
      const std::size_t s_lo = t > lag ? t - lag : 1;
      const auto mt = cloud.draws_at(t);
      for (std::size_t s = s_lo; s < t; ++s) {
        const auto ms = cloud.draws_at(s);
        const Vector& mean_s = batch_mean[s - 1];
        const Vector& mean_t = batch_mean[t - 1];
        Matrix c = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < n; ++i) {
          if (w[i] == 0.0) continue;
          const double* ps = ms.data() + i * cloud.stride();
          const double* pt = mt.data() + i * cloud.stride();
          for (std::size_t a = 0; a < d; ++a) {
            const double da = w[i] * (ps[a] - mean_s(static_cast<Eigen::Index>(a)));
            for (std::size_t b = 0; b < d; ++b)
              c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += da * (pt[b] - mean_t(static_cast<Eigen::Index>(b)));
          }
        }
        acc.crosscov.push_back({s, t, u, std::move(c)});
      }
    }
  };

  for (std::size_t u = 1; u <= horizon; ++u) {
    const auto obs = y.at(u - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto theta_i = cloud.draw(i, u);
      config.kernel.perturb_into(center, config.tau, rng, theta_i);
      auto x = cloud.state(i);
      if (!model.admissible(theta_i)) {
        log_w[i] = -std::numeric_limits<double>::infinity();
        continue;
      }
      if (u == 1) {
        model.sample_initial(theta_i, rng, x);
      } else {
        std::copy(x.begin(), x.end(), prev_state.begin());
        model.sample_transition(prev_state, theta_i, rng, x);
      }
      log_w[i] = prev_log_w[i] + model.obs_log_density(obs, x, theta_i);
    }

    WeightSummary summary;
    try {
      summary = normalize_log_weights(log_w, w);
    } catch (const DegeneratePosteriorError&) {
      throw ParticleCollapseError(u);
    }
    acc.loglik += summary.log_sum;
    if (observer) observer(u, w);

    if (u == horizon) {
      read_off(horizon > lag ? horizon - lag : 1, horizon, u);
      break;
    }
    if (u > lag) read_off(u - lag, u - lag, u);

    if (!config.ess_trigger || summary.ess < *config.ess_trigger * static_cast<double>(n)) {
      resample(w, config.resampling, rng, ancestors);
      cloud.gather(ancestors);
      std::fill(prev_log_w.begin(), prev_log_w.end(), -std::log(static_cast<double>(n)));
    } else {
      for (std::size_t i = 0; i < n; ++i) prev_log_w[i] = std::log(w[i]);
    }
  }
  return acc;
}

ScoreVector score_ssm(const FixedLagAccumulator& acc, const Vector& theta, double tau,
                      const PerturbationKernel& kernel) {
  check_tau(tau);
  if (!acc.complete()) throw std::invalid_argument("score_ssm: accumulator incomplete");
  if (acc.dim != kernel.dim() || static_cast<std::size_t>(theta.size()) != acc.dim)
    throw std::invalid_argument("score_ssm: dimension mismatch");
  Vector total = Vector::Zero(theta.size());
  for (const Vector& m : acc.mean) total += m - theta;
  ScoreVector out;
  out.values.resize(theta.size());
  for (Eigen::Index a = 0; a < theta.size(); ++a)
    out.values(a) = total(a) / (tau * tau * kernel.variance(static_cast<std::size_t>(a)));
  out.meta = {tau, 0, "smc-score"};
  return out;
}

InfoMatrix oim_ssm(const FixedLagAccumulator& acc, double tau, const PerturbationKernel& kernel) {
  check_tau(tau);
  if (!acc.complete()) throw std::invalid_argument("oim_ssm: accumulator incomplete");
  if (acc.dim != kernel.dim()) throw std::invalid_argument("oim_ssm: dimension mismatch");
  const auto d = static_cast<Eigen::Index>(acc.dim);
  const double tau2 = tau * tau;
  const Matrix prior = tau2 * kernel.covariance();
  Matrix total = Matrix::Zero(d, d);
  for (const Matrix& v : acc.var) total += v - prior;
  for (const CrossCovariance& c : acc.crosscov) total += c.value + c.value.transpose();
  Matrix out(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b)
      out(a, b) = -total(a, b) / (tau2 * tau2 * kernel.variance(static_cast<std::size_t>(a)) *
                                  kernel.variance(static_cast<std::size_t>(b)));
  return {symmetrized(out), {tau, 0, "smc-oim"}};
}

double bootstrap_loglik(const StateSpaceModel& model, const ObservationSequence& y, const Vector& theta,
                        std::size_t n_particles, ResamplingScheme scheme, std::uint64_t seed) {
  ExtendedFilterConfig config;
  config.theta = theta;
  config.tau = 0.0;
  config.kernel = PerturbationKernel(std::vector<double>(model.param_dim(), 1.0));
  config.lag = 0;
  config.n_particles = n_particles;
  config.resampling = scheme;
  config.seed = seed;
  return run_extended_bootstrap(model, y, config).loglik;
}

void write_accumulator_csv(const FixedLagAccumulator& acc, std::ostream& moments, std::ostream& crosscov) {
  moments << "t,component,mean,var_diag\n";
  for (std::size_t t = 0; t < acc.mean.size(); ++t) {
    for (std::size_t a = 0; a < acc.dim; ++a) {
      const auto k = static_cast<Eigen::Index>(a);
      moments << (t + 1) << ',' << (a + 1) << ',' << format_double(acc.mean[t](k)) << ','
              << format_double(acc.var[t](k, k)) << '\n';
    }
  }
  crosscov << "s,t,i,j,crosscov\n";
  for (const CrossCovariance& c : acc.crosscov) {
    for (std::size_t a = 0; a < acc.dim; ++a)
      for (std::size_t b = 0; b < acc.dim; ++b)
        crosscov << c.s << ',' << c.t << ',' << (a + 1) << ',' << (b + 1) << ','
                 << format_double(c.value(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))) << '\n';
  }
}

}  // namespace dfscore
