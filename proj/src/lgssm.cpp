#include "dfscore/lgssm.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dfscore {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double normal_logpdf(double x, double mean, double var) {
  const double r = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + r * r / var);
}

}  // namespace

std::string to_string(ArParam p) {
  switch (p) {
    case ArParam::phi: return "phi";
    case ArParam::log_sigma_v: return "log_sigma_v";
    case ArParam::log_sigma_w: return "log_sigma_w";
  }
  return "?";
}

ArParam ar_param_from_string(const std::string& name) {
  if (name == "phi") return ArParam::phi;
  if (name == "log_sigma_v") return ArParam::log_sigma_v;
  if (name == "log_sigma_w") return ArParam::log_sigma_w;
  throw std::invalid_argument("unknown AR parameter '" + name + "'");
}

ArParameterization::ArParameterization(LgssmSpec spec) : spec_(std::move(spec)) {
  if (spec_.free.empty() || spec_.free.size() > 3)
    throw std::invalid_argument("lgssm: between 1 and 3 free parameters required");
  for (std::size_t i = 0; i < spec_.free.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (spec_.free[i] == spec_.free[j]) throw std::invalid_argument("lgssm: duplicate free parameter");
  if (!(spec_.sigma_v > 0.0) || !(spec_.sigma_w > 0.0))
    throw std::invalid_argument("lgssm: noise scales must be > 0");
  if (!spec_.stationary_init && !(spec_.init_var > 0.0))
    throw std::invalid_argument("lgssm: initial variance must be > 0");
}

ArValues ArParameterization::mapped(std::span<const double> theta) const {
  ArValues v{spec_.phi, spec_.sigma_v, spec_.sigma_w};
  for (std::size_t i = 0; i < spec_.free.size(); ++i) {
    switch (spec_.free[i]) {
      case ArParam::phi: v.phi = theta[i]; break;
      case ArParam::log_sigma_v: v.sigma_v = std::exp(theta[i]); break;
      case ArParam::log_sigma_w: v.sigma_w = std::exp(theta[i]); break;
    }
  }
  return v;
}

bool ArParameterization::admissible(std::span<const double> theta) const {
  const ArValues v = mapped(theta);
  return std::isfinite(v.phi) && std::isfinite(v.sigma_v) && std::isfinite(v.sigma_w) && v.sigma_v > 0.0 &&
         v.sigma_w > 0.0 && (!spec_.stationary_init || std::abs(v.phi) < 1.0);
}

ArValues ArParameterization::values(std::span<const double> theta) const {
  const ArValues v = mapped(theta);
  if (!std::isfinite(v.phi) || !std::isfinite(v.sigma_v) || !std::isfinite(v.sigma_w) ||
      !(v.sigma_v > 0.0) || !(v.sigma_w > 0.0))
    throw std::domain_error("lgssm: parameters not finite/positive after mapping");
  if (spec_.stationary_init && !(std::abs(v.phi) < 1.0))
    throw std::domain_error("lgssm: stationary initial law needs |phi| < 1");
  return v;
}

Vector ArParameterization::theta_for(const ArValues& v) const {
  Vector theta(static_cast<Eigen::Index>(spec_.free.size()));
  for (std::size_t i = 0; i < spec_.free.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    switch (spec_.free[i]) {
      case ArParam::phi: theta(k) = v.phi; break;
      case ArParam::log_sigma_v: theta(k) = std::log(v.sigma_v); break;
      case ArParam::log_sigma_w: theta(k) = std::log(v.sigma_w); break;
    }
  }
  return theta;
}

double ArParameterization::initial_variance(const ArValues& v) const {
  if (spec_.stationary_init) return v.sigma_v * v.sigma_v / (1.0 - v.phi * v.phi);
  return spec_.init_var;
}

void LinearGaussianModel::sample_initial(std::span<const double> theta, Rng& rng,
                                         std::span<double> x) const {
  const ArValues v = params_.values(theta);
  const double mean = params_.spec().stationary_init ? 0.0 : params_.spec().init_mean;
  x[0] = mean + std::sqrt(params_.initial_variance(v)) * rng.normal();
}

void LinearGaussianModel::sample_transition(std::span<const double> x_prev,
                                            std::span<const double> theta, Rng& rng,
                                            std::span<double> x) const {
  const ArValues v = params_.values(theta);
  x[0] = v.phi * x_prev[0] + v.sigma_v * rng.normal();
}

double LinearGaussianModel::obs_log_density(std::span<const double> y, std::span<const double> x,
                                            std::span<const double> theta) const {
  const ArValues v = params_.values(theta);
  return normal_logpdf(y[0], x[0], v.sigma_w * v.sigma_w);
}

void LinearGaussianModel::sample_observation(std::span<const double> x, std::span<const double> theta,
                                             Rng& rng, std::span<double> y) const {
  const ArValues v = params_.values(theta);
  y[0] = x[0] + v.sigma_w * rng.normal();
}

void LognormalShockModel::sample_initial(std::span<const double>, Rng& rng, std::span<double> x) const {
  x[0] = rng.normal();
}

void LognormalShockModel::sample_transition(std::span<const double> x_prev,
                                            std::span<const double> theta, Rng& rng,
                                            std::span<double> x) const {
  const ArValues v = params_.values(theta);
  const double a = rng.normal();
  const double b = rng.normal();
  x[0] = v.phi * x_prev[0] + v.sigma_v * (std::exp(0.5 * a) - std::exp(0.5 * b));
}

double LognormalShockModel::obs_log_density(std::span<const double> y, std::span<const double> x,
                                            std::span<const double> theta) const {
  const ArValues v = params_.values(theta);
  return normal_logpdf(y[0], x[0], v.sigma_w * v.sigma_w);
}

void LognormalShockModel::sample_observation(std::span<const double> x, std::span<const double> theta,
                                             Rng& rng, std::span<double> y) const {
  const ArValues v = params_.values(theta);
  y[0] = x[0] + v.sigma_w * rng.normal();
}

double kalman_loglik(const LinearGaussianModel& model, const Vector& theta, const ObservationSequence& y) {
  const auto& params = model.parameterization();
  if (static_cast<std::size_t>(theta.size()) != params.dim())
    throw std::invalid_argument("kalman_loglik: theta dimension mismatch");
  if (y.dim() != 1 || y.length() < 1) throw std::invalid_argument("kalman_loglik: need scalar y with T >= 1");
  const ArValues v = params.values({theta.data(), params.dim()});
  const double q = v.sigma_v * v.sigma_v;
  const double r = v.sigma_w * v.sigma_w;

  double mean = params.spec().stationary_init ? 0.0 : params.spec().init_mean;
  double var = params.initial_variance(v);
  double ll = 0.0;
  for (std::size_t t = 0; t < y.length(); ++t) {
    const double obs = y.at(t)[0];
    const double s = var + r;
    ll += normal_logpdf(obs, mean, s);
    const double filtered_mean = mean + (var / s) * (obs - mean);
    const double filtered_var = var * r / s;
    mean = v.phi * filtered_mean;
    var = v.phi * v.phi * filtered_var + q;
  }
  return ll;
}

DerivativeOracle kalman_score_oim_oracle(const LinearGaussianModel& model, const Vector& theta,
                                         const ObservationSequence& y, const RichardsonSteps& steps) {
  return richardson_derivatives([&](const Vector& th) { return kalman_loglik(model, th, y); }, theta, steps);
}

}  // namespace dfscore
