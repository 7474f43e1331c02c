#include "dfscore/harness/slope.hpp"

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace dfscore::harness {

SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: x and y differ in length");
  SlopeFit fit;
  std::vector<double> lx, ly;
  std::set<double> distinct;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0) || !std::isfinite(x[k]) || !std::isfinite(y[k])) {
      ++fit.filtered;
      continue;
    }
    lx.push_back(std::log(x[k]));
    ly.push_back(std::log(y[k]));
    distinct.insert(x[k]);
  }
  if (distinct.size() < 3) throw std::invalid_argument("fit_loglog: need at least 3 distinct positive x values");

  const auto n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
  }
  fit.slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    const double r = ly[k] - my - fit.slope * (lx[k] - mx);
    ssr += r * r;
  }
  fit.stderr_ = std::sqrt(ssr / (n - 2.0) / sxx);
  fit.points = lx.size();
  return fit;
}

SlopeFit fit_rate_slope(std::span<const RunRecord> records, XField xf, YAggregate yf) {
  struct Acc {
    double sum_err = 0.0;
    double sum_sq = 0.0;
    std::size_t count = 0;
  };
  std::map<double, Acc> groups;
  std::size_t skipped = 0;
  for (const auto& r : records) {
    std::optional<double> x;
    switch (xf) {
      case XField::tau: x = r.tau; break;
      case XField::h: x = r.h; break;
      case XField::n_particles:
        if (r.n_particles) x = static_cast<double>(*r.n_particles);
        break;
      case XField::delta:
        if (r.delta) x = static_cast<double>(*r.delta);
        break;
    }
    if (!r.ok() || !x || !r.estimate || !r.oracle) {
      ++skipped;
      continue;
    }
    auto& g = groups[*x];
    const double e = *r.estimate - *r.oracle;
    g.sum_err += e;
    g.sum_sq += e * e;
    ++g.count;
  }
  std::vector<double> xs, ys;
  for (const auto& [x, g] : groups) {
    xs.push_back(x);
    const double n = static_cast<double>(g.count);
    ys.push_back(yf == YAggregate::mse ? g.sum_sq / n : std::abs(g.sum_err / n));
  }
  SlopeFit fit = fit_loglog(xs, ys);
  fit.filtered += skipped;
  return fit;
}

}  // namespace dfscore::harness
