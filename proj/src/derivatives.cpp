#include "dfscore/derivatives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dfscore {
namespace {

Vector central_gradient(const std::function<double(const Vector&)>& f, const Vector& theta, double h) {
  Vector g(theta.size());
  for (Eigen::Index r = 0; r < theta.size(); ++r) {
    Vector p = theta, m = theta;
    p(r) += h;
    m(r) -= h;
    g(r) = (f(p) - f(m)) / (2.0 * h);
  }
  return g;
}

Matrix central_hessian(const std::function<double(const Vector&)>& f, const Vector& theta, double h) {
  const Eigen::Index d = theta.size();
  const double f0 = f(theta);
  Matrix hess(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    Vector p = theta, m = theta;
    p(r) += h;
    m(r) -= h;
    hess(r, r) = (f(p) - 2.0 * f0 + f(m)) / (h * h);
    for (Eigen::Index s = r + 1; s < d; ++s) {
      auto at = [&](double a, double b) {
        Vector x = theta;
        x(r) += a * h;
        x(s) += b * h;
        return f(x);
      };
      hess(r, s) = hess(s, r) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
    }
  }
  return hess;
}

}  // namespace

DerivativeOracle richardson_derivatives(const std::function<double(const Vector&)>& f,
                                        const Vector& theta, const RichardsonSteps& steps) {
  if (!(steps.score_h > 0.0) || !(steps.hessian_h > 0.0))
    throw std::invalid_argument("richardson_derivatives: step sizes must be > 0");

  const Vector g1 = central_gradient(f, theta, steps.score_h);
  const Vector g2 = central_gradient(f, theta, 0.5 * steps.score_h);
  const Vector g = (4.0 * g2 - g1) / 3.0;

  const Matrix h1 = central_hessian(f, theta, steps.hessian_h);
  const Matrix h2 = central_hessian(f, theta, 0.5 * steps.hessian_h);
  const Matrix hess = (4.0 * h2 - h1) / 3.0;

  DerivativeOracle out;
  out.score = {g, {0.0, 0, "oracle"}};
  out.oim = {symmetrized(-hess), {0.0, 0, "oracle"}};
  out.score_error = g.size() ? (g - g2).cwiseAbs().maxCoeff() : 0.0;
  out.oim_error = hess.size() ? (hess - h2).cwiseAbs().maxCoeff() : 0.0;
  if (!g.allFinite() || !hess.allFinite()) throw std::domain_error("richardson_derivatives: non-finite result");
  out.accuracy_warning = std::max(out.score_error, out.oim_error) > steps.warn_threshold;
  return out;
}

}  // namespace dfscore
