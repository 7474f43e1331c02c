#include "dfscore/general.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfscore/weights.hpp"

namespace dfscore {
namespace {

void check_dims(std::size_t model_dim, const Vector& theta, const PerturbationKernel& kernel) {
  if (model_dim != kernel.dim() || static_cast<std::size_t>(theta.size()) != kernel.dim())
    throw std::invalid_argument("dimension mismatch between model, theta and kernel");
}

double evaluate_checked(const LogLikelihood& loglik, const Vector& at, std::uint64_t seed,
                        std::size_t k) {
  Rng rng(derive_seed(seed, k));
  const double value = loglik(at, rng);
  if (!std::isfinite(value))
    throw std::domain_error("finite difference: non-finite log-likelihood at stencil point " +
                            std::to_string(k));
  return value;
}

}  // namespace

PosteriorMoments posterior_moments_is(const GeneralModel& model, const Vector& theta, double tau,
                                      const PerturbationKernel& kernel, std::size_t n, Rng& rng) {
  check_tau(tau);
  check_dims(model.dim, theta, kernel);
  if (n < 2) throw std::invalid_argument("posterior_moments_is: need n >= 2");

  const std::size_t d = kernel.dim();
  std::vector<double> draws(n * d);
  std::vector<double> log_w(n);
  Vector draw(static_cast<Eigen::Index>(d));
  const std::span<const double> center{theta.data(), d};
  for (std::size_t i = 0; i < n; ++i) {
    kernel.perturb_into(center, tau, rng, {draw.data(), d});
    std::copy(draw.data(), draw.data() + d, draws.begin() + static_cast<std::ptrdiff_t>(i * d));
    log_w[i] = model.log_likelihood(draw, rng);
  }

  std::vector<double> w(n);
  const WeightSummary summary = normalize_log_weights(log_w, w);
  PosteriorMoments out;
  weighted_moments(w, draws, d, d, center, out.mean, out.covariance);
  out.ess = summary.ess;
  out.n = n;
  return out;
}

ScoreVector score_general(const PosteriorMoments& moments, const Vector& theta, double tau,
                          const PerturbationKernel& kernel) {
  check_tau(tau);
  if (static_cast<std::size_t>(moments.mean.size()) != kernel.dim() || theta.size() != moments.mean.size())
    throw std::invalid_argument("score_general: dimension mismatch");
  if (!moments.mean.allFinite()) throw std::domain_error("score_general: non-finite posterior mean");
  ScoreVector out;
  out.values.resize(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    out.values(i) = (moments.mean(i) - theta(i)) / (tau * tau * kernel.variance(static_cast<std::size_t>(i)));
  out.meta = {tau, moments.n, "is-score"};
  return out;
}

InfoMatrix oim_general(const PosteriorMoments& moments, double tau, const PerturbationKernel& kernel) {
  check_tau(tau);
  const auto d = static_cast<Eigen::Index>(kernel.dim());
  if (moments.covariance.rows() != d || moments.covariance.cols() != d)
    throw std::invalid_argument("oim_general: dimension mismatch");
  const double tau2 = tau * tau;
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double prior = (i == j) ? tau2 * kernel.variance(static_cast<std::size_t>(i)) : 0.0;
      m(i, j) = (prior - moments.covariance(i, j)) /
                (tau2 * tau2 * kernel.variance(static_cast<std::size_t>(i)) *
                 kernel.variance(static_cast<std::size_t>(j)));
    }
  }
  return {symmetrized(m), {tau, moments.n, "is-oim"}};
}

std::size_t fd_score_evaluations(std::size_t dim) { return 2 * dim; }

std::size_t fd_oim_evaluations(std::size_t dim) { return 1 + 2 * dim + 2 * dim * (dim - 1); }

ScoreVector fd_score(const LogLikelihood& loglik, const Vector& theta, const FdConfig& config) {
  if (!std::isfinite(config.h) || !(config.h > 0.0)) throw std::invalid_argument("fd: h must be > 0");
  const double h = config.h;
  ScoreVector out;
  out.values.resize(theta.size());
  for (Eigen::Index r = 0; r < theta.size(); ++r) {
    Vector plus = theta, minus = theta;
    plus(r) += h;
    minus(r) -= h;
    const auto k = static_cast<std::size_t>(2 * r);
    const double lp = evaluate_checked(loglik, plus, config.seed, k);
    const double lm = evaluate_checked(loglik, minus, config.seed, k + 1);
    out.values(r) = (lp - lm) / (2.0 * h);
  }
  out.meta = {0.0, 0, "fd-score"};
  return out;
}

InfoMatrix fd_oim(const LogLikelihood& loglik, const Vector& theta, const FdConfig& config) {
  if (!std::isfinite(config.h) || !(config.h > 0.0)) throw std::invalid_argument("fd: h must be > 0");
  const double h = config.h;
  const Eigen::Index d = theta.size();
  std::size_t k = 0;
  const double l0 = evaluate_checked(loglik, theta, config.seed, k++);
  Matrix hess(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    Vector plus = theta, minus = theta;
    plus(r) += h;
    minus(r) -= h;
    const double lp = evaluate_checked(loglik, plus, config.seed, k++);
    const double lm = evaluate_checked(loglik, minus, config.seed, k++);
    hess(r, r) = (lp - 2.0 * l0 + lm) / (h * h);
  }
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index s = r + 1; s < d; ++s) {
      double corner[4];
      const double sr[4] = {1, 1, -1, -1};
      const double ss[4] = {1, -1, 1, -1};
      for (int c = 0; c < 4; ++c) {
        Vector at = theta;
        at(r) += sr[c] * h;
        at(s) += ss[c] * h;
        corner[c] = evaluate_checked(loglik, at, config.seed, k++);
      }
      hess(r, s) = hess(s, r) = (corner[0] - corner[1] - corner[2] + corner[3]) / (4.0 * h * h);
    }
  }
  return {symmetrized(-hess), {0.0, 0, "fd-oim"}};
}

PosteriorMoments posterior_moments_quadrature(const GeneralModel& model, const Vector& theta,
                                              double tau, const PerturbationKernel& kernel,
                                              const QuadratureGrid& grid) {
  check_tau(tau);
  check_dims(model.dim, theta, kernel);
  const std::size_t d = kernel.dim();
  if (d > 2) throw std::invalid_argument("posterior_moments_quadrature: only d <= 2 is supported");
  if (grid.points_per_axis < 2001 || !(grid.half_width_sd >= 8.0))
    throw std::invalid_argument(
        "posterior_moments_quadrature: grid needs >= 2001 points per axis over >= +-8 sd");

  const std::size_t m = grid.points_per_axis;
  const double step = 2.0 * grid.half_width_sd / static_cast<double>(m - 1);
  std::vector<double> nodes(m), trap(m, 1.0);
  for (std::size_t k = 0; k < m; ++k) nodes[k] = -grid.half_width_sd + step * static_cast<double>(k);
  trap.front() = trap.back() = 0.5;

  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= m;

  // Node index -> standardized coordinates u; theta~ = theta + tau * sigma .* u.
  auto coords = [&](std::size_t idx, double* u) {
    for (std::size_t i = 0; i < d; ++i) {
      u[i] = nodes[idx % m];
      idx /= m;
    }
  };
  auto trap_weight = [&](std::size_t idx) {
    double w = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      w *= trap[idx % m];
      idx /= m;
    }
    return w;
  };

  Rng fixed(0);
  std::vector<double> log_w(total);
  Vector at(static_cast<Eigen::Index>(d));
  double u[2];
  for (std::size_t idx = 0; idx < total; ++idx) {
    coords(idx, u);
    double log_prior = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      at(static_cast<Eigen::Index>(i)) = theta(static_cast<Eigen::Index>(i)) + tau * (kernel.sigmas()[i] * u[i]);
      log_prior -= 0.5 * u[i] * u[i];
    }
    log_w[idx] = model.log_likelihood(at, fixed) + log_prior + std::log(trap_weight(idx));
  }
  std::vector<double> w(total);
  const WeightSummary summary = normalize_log_weights(log_w, w);

  // Moments of the deviation tau * sigma .* u, accumulated without storing nodes.
  const auto de = static_cast<Eigen::Index>(d);
  Vector dev = Vector::Zero(de);
  for (std::size_t idx = 0; idx < total; ++idx) {
    if (w[idx] == 0.0) continue;
    coords(idx, u);
    for (std::size_t i = 0; i < d; ++i) dev(static_cast<Eigen::Index>(i)) += w[idx] * (tau * (kernel.sigmas()[i] * u[i]));
  }
  Matrix cov = Matrix::Zero(de, de);
  for (std::size_t idx = 0; idx < total; ++idx) {
    if (w[idx] == 0.0) continue;
    coords(idx, u);
    double c[2];
    for (std::size_t i = 0; i < d; ++i) c[i] = tau * (kernel.sigmas()[i] * u[i]) - dev(static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += w[idx] * c[i] * c[j];
  }

  PosteriorMoments out;
  out.mean = theta + dev;
  out.covariance = symmetrized(cov);
  out.ess = summary.ess;
  out.n = total;
  return out;
}

}  // namespace dfscore
