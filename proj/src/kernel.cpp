#include "dfscore/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dfscore {

PerturbationKernel::PerturbationKernel(std::vector<double> sigmas) : sigmas_(std::move(sigmas)) {
  if (sigmas_.empty()) throw std::invalid_argument("kernel: sigmas must be non-empty");
  for (std::size_t i = 0; i < sigmas_.size(); ++i) {
    if (!std::isfinite(sigmas_[i]) || !(sigmas_[i] > 0.0))
      throw std::invalid_argument("kernel: sigma[" + std::to_string(i) +
                                  "] must be finite and > 0");
  }
}

double PerturbationKernel::variance(std::size_t i) const {
  if (i >= dim()) throw std::out_of_range("kernel: index out of range");
  return sigmas_[i] * sigmas_[i];
}

Matrix PerturbationKernel::covariance() const {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = variance(i);
  return out;
}

Matrix PerturbationKernel::precision() const {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0 / variance(i);
  return out;
}

double PerturbationKernel::fourth_moment(std::size_t i) const {
  const double v = variance(i);
  return 3.0 * v * v;
}

Vector PerturbationKernel::perturb(const Vector& center, double tau, const Vector& z) const {
  check_tau(tau, true);
  if (static_cast<std::size_t>(center.size()) != dim() || static_cast<std::size_t>(z.size()) != dim())
    throw std::invalid_argument("kernel: dimension mismatch");
  Vector out(center.size());
  for (Eigen::Index i = 0; i < center.size(); ++i)
    out(i) = center(i) + tau * (sigmas_[static_cast<std::size_t>(i)] * z(i));
  return out;
}

void PerturbationKernel::perturb_into(std::span<const double> center, double tau, Rng& rng,
                                      std::span<double> out) const {
  for (std::size_t i = 0; i < sigmas_.size(); ++i) {
    const double z = rng.normal();
    out[i] = center[i] + tau * (sigmas_[i] * z);
  }
}

PerturbationKernel make_gaussian_kernel(std::vector<double> sigmas) {
  return PerturbationKernel(std::move(sigmas));
}

Vector sample_perturbation(const PerturbationKernel& kernel, const Vector& center, double tau,
                           Rng& rng) {
  check_tau(tau, true);
  if (static_cast<std::size_t>(center.size()) != kernel.dim())
    throw std::invalid_argument("sample_perturbation: dimension mismatch");
  Vector out(center.size());
  kernel.perturb_into({center.data(), kernel.dim()}, tau, rng, {out.data(), kernel.dim()});
  return out;
}

Matrix kernel_covariance(const PerturbationKernel& kernel) { return kernel.covariance(); }

double kernel_fourth_moment(const PerturbationKernel& kernel, std::size_t i) {
  return kernel.fourth_moment(i);
}

void check_tau(double tau, bool allow_zero) {
  if (!std::isfinite(tau) || tau < 0.0 || (!allow_zero && tau == 0.0))
    throw std::invalid_argument(allow_zero ? "tau must be finite and >= 0"
                                           : "tau must be finite and > 0");
}

}  // namespace dfscore
