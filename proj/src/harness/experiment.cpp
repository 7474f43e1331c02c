#include "dfscore/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <thread>

#include "dfscore/csv.hpp"
#include "dfscore/errors.hpp"
#include "dfscore/general.hpp"
#include "dfscore/kernel.hpp"
#include "dfscore/lgssm.hpp"
#include "dfscore/rng.hpp"
#include "dfscore/smc.hpp"

namespace dfscore::harness {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Runs body(k) for k in [0, count) on up to `threads` workers. Each body
// must catch its own exceptions.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t k = next.fetch_add(1); k < count; k = next.fetch_add(1)) body(k);
    });
}

struct Oracle {
  Vector score;
  Matrix oim;
};

// Everything the tasks share: model, data, likelihoods and the oracle. All
// members are read-only once built.
class Problem {
 public:
  explicit Problem(const ExperimentConfig& c) : config_(c), kernel_(c.kernel_sigmas) {
    switch (c.model) {
      case ModelKind::lgssm: {
        auto m = std::make_unique<LinearGaussianModel>(c.ar);
        lgssm_ = m.get();
        ssm_ = std::move(m);
        break;
      }
      case ModelKind::lognormal_shock:
        ssm_ = std::make_unique<LognormalShockModel>(c.ar);
        break;
      default:
        break;
    }
    if (ssm_) data_ = experiment_data(c);
    build_exact();
    build_oracle();
  }

  const ExperimentConfig& config() const { return config_; }
  const PerturbationKernel& kernel() const { return kernel_; }
  const StateSpaceModel* ssm() const { return ssm_.get(); }
  const ObservationSequence& data() const { return data_; }
  const std::optional<Oracle>& oracle() const { return oracle_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Log-likelihood seen by IS and FD. Noise-free unless the state-space
  // likelihood is itself a bootstrap filter estimate with n particles.
  LogLikelihood loglik(std::size_t n) const {
    if (exact_ && config_.loglik == LoglikSource::kalman) {
      auto f = exact_;
      return [f](const Vector& theta, Rng&) { return f(theta); };
    }
    if (!ssm_) throw std::logic_error("no likelihood available");
    const StateSpaceModel* model = ssm_.get();
    const ObservationSequence* y = &data_;
    const ResamplingScheme scheme = config_.resampling;
    return [model, y, n, scheme](const Vector& theta, Rng& rng) {
      const std::uint64_t seed = rng.engine()();
      try {
        return bootstrap_loglik(*model, *y, theta, n, scheme, seed);
      } catch (const std::domain_error&) {
        return kNegInf;
      } catch (const ParticleCollapseError&) {
        return kNegInf;
      }
    };
  }

  bool has_exact() const { return static_cast<bool>(exact_); }
  const std::function<double(const Vector&)>& exact() const { return exact_; }

 private:
  void build_exact() {
    const auto& c = config_;
    switch (c.model) {
      case ModelKind::gaussian: {
        const auto y = c.y;
        const auto s = c.obs_sd;
        exact_ = [y, s](const Vector& theta) {
          double l = 0.0;
          for (std::size_t i = 0; i < y.size(); ++i) {
            const double z = (theta(static_cast<Eigen::Index>(i)) - y[i]) / s[i];
            l -= 0.5 * z * z;
          }
          return l;
        };
        break;
      }
      case ModelKind::poisson: {
        const auto y = c.y;
        exact_ = [y](const Vector& theta) {
          double l = 0.0;
          for (std::size_t i = 0; i < y.size(); ++i) {
            const double t = theta(static_cast<Eigen::Index>(i));
            l += y[i] * t - std::exp(t);
          }
          return l;
        };
        break;
      }
      case ModelKind::quartic:
        exact_ = [](const Vector& theta) { return -theta.array().pow(4).sum(); };
        break;
      case ModelKind::lgssm: {
        const LinearGaussianModel* m = lgssm_;
        const ObservationSequence* y = &data_;
        exact_ = [m, y](const Vector& theta) {
          try {
            return kalman_loglik(*m, theta, *y);
          } catch (const std::domain_error&) {
            return kNegInf;
          }
        };
        break;
      }
      case ModelKind::lognormal_shock:
        break;
    }
  }

  void build_oracle() {
    const auto& c = config_;
    const Eigen::Index d = c.theta.size();
    Oracle o{Vector::Zero(d), Matrix::Zero(d, d)};
    switch (c.model) {
      case ModelKind::gaussian:
        for (Eigen::Index i = 0; i < d; ++i) {
          const double s2 = c.obs_sd[i] * c.obs_sd[i];
          o.score(i) = -(c.theta(i) - c.y[i]) / s2;
          o.oim(i, i) = 1.0 / s2;
        }
        break;
      case ModelKind::poisson:
        for (Eigen::Index i = 0; i < d; ++i) {
          o.score(i) = c.y[i] - std::exp(c.theta(i));
          o.oim(i, i) = std::exp(c.theta(i));
        }
        break;
      case ModelKind::quartic:
        for (Eigen::Index i = 0; i < d; ++i) {
          o.score(i) = -4.0 * std::pow(c.theta(i), 3);
          o.oim(i, i) = 12.0 * c.theta(i) * c.theta(i);
        }
        break;
      case ModelKind::lgssm: {
        const DerivativeOracle r = kalman_score_oim_oracle(*lgssm_, c.theta, data_);
        o.score = r.score.values;
        o.oim = r.oim.values;
        if (r.accuracy_warning)
          warnings_.push_back("oracle: Richardson discrepancy above threshold (score " +
                              format_double(r.score_error) + ", oim " + format_double(r.oim_error) + ")");
        break;
      }
      case ModelKind::lognormal_shock:
        return;
    }
    oracle_ = std::move(o);
  }

  const ExperimentConfig& config_;
  PerturbationKernel kernel_;
  std::unique_ptr<StateSpaceModel> ssm_;
  const LinearGaussianModel* lgssm_ = nullptr;
  ObservationSequence data_;
  std::function<double(const Vector&)> exact_;
  std::optional<Oracle> oracle_;
  std::vector<std::string> warnings_;
};

struct GridPoint {
  std::optional<double> tau;
  std::optional<std::size_t> n;
  std::optional<std::size_t> lag;
  std::optional<double> h;
};

bool is_kind(Estimator e) { return e == Estimator::is_score || e == Estimator::is_oim; }
bool fd_kind(Estimator e) { return e == Estimator::fd_score || e == Estimator::fd_oim; }
bool smc_kind(Estimator e) { return e == Estimator::smc_score || e == Estimator::smc_oim; }
bool quad_kind(Estimator e) { return e == Estimator::quad_score || e == Estimator::quad_oim; }

double coupled(double scale, double exponent, std::size_t n) {
  return scale * std::pow(static_cast<double>(n), -exponent);
}

bool fd_uses_particles(const ExperimentConfig& c) {
  return is_state_space(c.model) && c.loglik == LoglikSource::smc;
}

template <class T>
std::vector<T> axis(const std::vector<T>& values, bool swept) {
  if (values.empty()) throw std::logic_error("empty grid axis");
  return swept ? values : std::vector<T>{values.front()};
}

std::vector<GridPoint> grid_for(const ExperimentConfig& c, Estimator e, Command cmd) {
  if (e == Estimator::oracle) return {GridPoint{}};
  const bool all = cmd == Command::estimate;
  const bool uses_tau = is_kind(e) || smc_kind(e) || quad_kind(e);
  const bool tau_coupled = uses_tau && !quad_kind(e) && c.tau_exponent.has_value();
  const bool h_coupled = fd_kind(e) && c.h_exponent.has_value();
  const bool uses_n = is_kind(e) || smc_kind(e) || (fd_kind(e) && fd_uses_particles(c)) || tau_coupled || h_coupled;

  if (cmd == Command::sweep_tau && tau_coupled)
    throw ConfigError("grid.tau_exponent", "sweep-tau needs tau independent of n");
  if (cmd == Command::sweep_tau && h_coupled)
    throw ConfigError("grid.h_exponent", "sweep-tau needs h independent of n");

  std::vector<std::optional<double>> taus{std::nullopt};
  if (uses_tau && !tau_coupled) {
    taus.clear();
    for (double t : axis(c.tau, all || cmd == Command::sweep_tau)) taus.emplace_back(t);
  }
  std::vector<std::optional<std::size_t>> ns{std::nullopt};
  if (uses_n) {
    ns.clear();
    for (std::size_t n : axis(c.n, all || cmd == Command::sweep_n)) ns.emplace_back(n);
  }
  std::vector<std::optional<std::size_t>> lags{std::nullopt};
  if (smc_kind(e)) {
    lags.clear();
    for (std::size_t l : axis(c.lag, all || cmd == Command::sweep_lag)) lags.emplace_back(l);
  }
  std::vector<std::optional<double>> hs{std::nullopt};
  if (fd_kind(e) && !h_coupled) {
    hs.clear();
    for (double h : axis(c.h, all || cmd == Command::sweep_tau)) hs.emplace_back(h);
  }

  std::vector<GridPoint> out;
  for (const auto& tau : taus)
    for (const auto& n : ns)
      for (const auto& lag : lags)
        for (const auto& h : hs) {
          GridPoint p{tau, n, lag, h};
          if (tau_coupled) p.tau = coupled(c.tau_scale, *c.tau_exponent, *n);
          if (h_coupled) p.h = coupled(c.h_scale, *c.h_exponent, *n);
          out.push_back(p);
        }
  return out;
}

// A raw estimate: vector for scores, matrix for OIMs.
struct Estimate {
  Vector score;
  Matrix oim;
  std::optional<std::size_t> n_particles;  // as actually used
};

Estimate estimate_once(const Problem& p, Estimator e, const GridPoint& g, std::uint64_t seed) {
  const auto& c = p.config();
  Estimate out;
  switch (e) {
    case Estimator::is_score:
    case Estimator::is_oim: {
      const std::size_t d = c.dim();
      GeneralModel model{d, p.loglik(c.loglik_particles)};
      Rng rng(seed);
      const PosteriorMoments m = posterior_moments_is(model, c.theta, *g.tau, p.kernel(), *g.n, rng);
      if (e == Estimator::is_score)
        out.score = score_general(m, c.theta, *g.tau, p.kernel()).values;
      else
        out.oim = oim_general(m, *g.tau, p.kernel()).values;
      out.n_particles = g.n;
      break;
    }
    case Estimator::quad_score:
    case Estimator::quad_oim: {
      if (!p.has_exact()) throw std::invalid_argument("quadrature needs a noise-free likelihood");
      const auto f = p.exact();
      GeneralModel model{c.dim(), [f](const Vector& t, Rng&) { return f(t); }};
      const PosteriorMoments m = posterior_moments_quadrature(model, c.theta, *g.tau, p.kernel());
      if (e == Estimator::quad_score)
        out.score = score_general(m, c.theta, *g.tau, p.kernel()).values;
      else
        out.oim = oim_general(m, *g.tau, p.kernel()).values;
      break;
    }
    case Estimator::fd_score:
    case Estimator::fd_oim: {
      const bool noisy = fd_uses_particles(c);
      const LogLikelihood l = p.loglik(noisy ? *g.n : 0);
      const FdConfig fd{*g.h, seed};
      if (e == Estimator::fd_score)
        out.score = fd_score(l, c.theta, fd).values;
      else
        out.oim = fd_oim(l, c.theta, fd).values;
      if (noisy) out.n_particles = g.n;
      break;
    }
    case Estimator::smc_score:
    case Estimator::smc_oim: {
      ExtendedFilterConfig fc;
      fc.theta = c.theta;
      fc.tau = *g.tau;
      fc.kernel = p.kernel();
      fc.lag = *g.lag;
      fc.n_particles = *g.n;
      fc.resampling = c.resampling;
      fc.seed = seed;
      fc.ess_trigger = c.ess_trigger;
      const FixedLagAccumulator acc = run_extended_bootstrap(*p.ssm(), p.data(), fc);
      if (e == Estimator::smc_score)
        out.score = score_ssm(acc, c.theta, *g.tau, p.kernel()).values;
      else
        out.oim = oim_ssm(acc, *g.tau, p.kernel()).values;
      out.n_particles = g.n;
      break;
    }
    case Estimator::oracle: {
      if (!p.oracle()) throw std::invalid_argument("no oracle for this model");
      out.score = p.oracle()->score;
      out.oim = p.oracle()->oim;
      break;
    }
  }
  return out;
}

struct Task {
  Estimator estimator;
  GridPoint point;
  std::size_t grid_index;
  std::size_t replication;
};

// Records of one task: d score rows, d*d OIM rows, or both for the oracle.
std::vector<RunRecord> records_for(const Problem& p, const Task& t, std::size_t run_id, std::uint64_t seed) {
  const auto& c = p.config();
  const std::size_t d = c.dim();
  RunRecord base;
  base.run_id = run_id;
  base.seed = seed;
  base.tau = t.point.tau;
  base.h = t.point.h;
  base.delta = t.point.lag;
  base.n_particles = t.point.n;
  if (fd_kind(t.estimator) && !fd_uses_particles(c)) base.n_particles.reset();
  if (p.ssm()) base.horizon = p.data().length();

  std::optional<Estimate> est;
  double ms = 0.0;
  try {
    const auto start = std::chrono::steady_clock::now();
    est = estimate_once(p, t.estimator, t.point, seed);
    ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  } catch (const std::exception& e) {
    base.status = error_status(e.what());
  }
  if (est && c.timing) base.wall_time_ms = ms;

  std::vector<RunRecord> out;
  const auto& oracle = p.oracle();
  auto push = [&](const std::string& method, std::size_t i, std::optional<std::size_t> j,
                  std::optional<double> value, std::optional<double> truth) {
    RunRecord r = base;
    r.method = method;
    r.i = i + 1;
    if (j) r.j = *j + 1;
    r.estimate = value;
    r.oracle = truth;
    if (value && truth) r.abs_error = std::abs(*value - *truth);
    out.push_back(std::move(r));
  };
  const bool score = t.estimator == Estimator::oracle || is_score_kind(t.estimator);
  const bool oim = t.estimator == Estimator::oracle || !is_score_kind(t.estimator);
  const std::string score_name = t.estimator == Estimator::oracle ? "oracle-score" : to_string(t.estimator);
  const std::string oim_name = t.estimator == Estimator::oracle ? "oracle-oim" : to_string(t.estimator);
  const auto idx = [](std::size_t k) { return static_cast<Eigen::Index>(k); };
  if (score)
    for (std::size_t i = 0; i < d; ++i)
      push(score_name, i, std::nullopt, est ? std::optional<double>(est->score(idx(i))) : std::nullopt,
           oracle ? std::optional<double>(oracle->score(idx(i))) : std::nullopt);
  if (oim)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        push(oim_name, i, j, est ? std::optional<double>(est->oim(idx(i), idx(j))) : std::nullopt,
             oracle ? std::optional<double>(oracle->oim(idx(i), idx(j))) : std::nullopt);
  return out;
}

// Sample mean and unbiased variance, computed on deviations from the first
// value so identical inputs give exactly zero variance.
std::pair<double, double> mean_var(const std::vector<double>& v) {
  if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double ref = v.front();
  double s = 0.0;
  for (double x : v) s += x - ref;
  const double md = s / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - ref - md) * (x - ref - md);
  const double var = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
  return {ref + md, var};
}

}  // namespace

ObservationSequence experiment_data(const ExperimentConfig& c) {
  if (!is_state_space(c.model)) return {};
  if (!c.data_path.empty()) {
    std::ifstream in(c.data_path);
    if (!in) throw ConfigError("data.path", "cannot open '" + c.data_path + "'");
    try {
      ObservationSequence y = read_observations_csv(in);
      if (y.dim() != 1) throw ConfigError("data.path", "expected scalar observations");
      return y;
    } catch (const std::invalid_argument& e) {
      throw ConfigError("data.path", e.what());
    }
  }
  std::unique_ptr<StateSpaceModel> m;
  if (c.model == ModelKind::lgssm)
    m = std::make_unique<LinearGaussianModel>(c.ar);
  else
    m = std::make_unique<LognormalShockModel>(c.ar);
  Rng rng(c.data_seed);
  try {
    return simulate(*m, c.true_theta, c.horizon, rng).observations;
  } catch (const std::domain_error& e) {
    throw ConfigError("data.true_theta", e.what());
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config, Command command) {
  const Problem problem(config);
  ExperimentResult result;
  result.warnings = problem.warnings();

  std::vector<Estimator> estimators = config.estimators;
  if (command == Command::oracle) {
    if (!problem.oracle()) throw ConfigError("model.type", "no oracle exists for this model");
    estimators = {Estimator::oracle};
  }

  std::vector<Task> tasks;
  std::size_t g = 0;
  for (Estimator e : estimators)
    for (const GridPoint& point : grid_for(config, e, command)) {
      for (std::size_t r = 0; r < config.replications; ++r) tasks.push_back({e, point, g, r});
      ++g;
    }

  std::vector<std::vector<RunRecord>> per_task(tasks.size());
  parallel_for(tasks.size(), config.threads, [&](std::size_t k) {
    const Task& t = tasks[k];
    const std::uint64_t seed = derive_seed(config.seed, t.replication, t.grid_index);
    per_task[k] = records_for(problem, t, k, seed);
  });

  result.tasks = tasks.size();
  for (auto& recs : per_task) {
    if (!recs.empty() && !recs.front().ok()) ++result.failed;
    for (auto& r : recs) result.records.push_back(std::move(r));
  }
  return result;
}

CompareResult compare_fd(const ExperimentConfig& config) {
  const Problem problem(config);
  CompareResult result;
  result.warnings = problem.warnings();
  const bool ssm = is_state_space(config.model);

  struct Arm {
    Estimator estimator;
    GridPoint point;
    std::size_t budget;
  };
  std::vector<std::pair<Arm, Arm>> pairs;
  for (Estimator e : config.estimators) {
    if (!fd_kind(e)) continue;
    const bool score = e == Estimator::fd_score;
    const Estimator prop = ssm ? (score ? Estimator::smc_score : Estimator::smc_oim)
                               : (score ? Estimator::is_score : Estimator::is_oim);
    if (config.n.empty()) throw ConfigError("grid.n", "compare-fd needs a particle count");
    const std::size_t n = config.n.front();
    GridPoint pp;
    pp.n = n;
    if (config.tau_exponent)
      pp.tau = coupled(config.tau_scale, *config.tau_exponent, n);
    else if (!config.tau.empty())
      pp.tau = config.tau.front();
    else
      throw ConfigError("grid.tau", "compare-fd needs a tau value");
    if (ssm) {
      if (config.lag.empty()) throw ConfigError("grid.lag", "compare-fd needs a lag value");
      pp.lag = config.lag.front();
    }
    const std::size_t evals = score ? fd_score_evaluations(config.dim()) : fd_oim_evaluations(config.dim());
    GridPoint fp;
    if (config.h_exponent)
      fp.h = coupled(config.h_scale, *config.h_exponent, n);
    else if (!config.h.empty())
      fp.h = config.h.front();
    else
      throw ConfigError("grid.h", "compare-fd needs an h value");
    std::size_t fd_budget = evals;
    if (fd_uses_particles(config)) {
      fp.n = std::max<std::size_t>(2, n / evals);
      fd_budget = evals * *fp.n;
    }
    pairs.push_back({Arm{prop, pp, n}, Arm{e, fp, fd_budget}});
  }
  if (pairs.empty()) throw ConfigError("estimators.methods", "compare-fd needs at least one fd-* estimator");

  const std::size_t R = config.replications;
  const std::size_t arms = pairs.size() * 2;
  const std::size_t total = arms * R;
  std::vector<std::optional<Estimate>> estimates(total);
  parallel_for(total, config.threads, [&](std::size_t k) {
    const std::size_t a = k / R;
    const std::size_t r = k % R;
    const Arm& arm = a % 2 == 0 ? pairs[a / 2].first : pairs[a / 2].second;
    try {
      estimates[k] = estimate_once(problem, arm.estimator, arm.point, derive_seed(config.seed, r, a));
    } catch (const std::exception&) {
      estimates[k].reset();
    }
  });
  result.tasks = total;
  for (const auto& e : estimates)
    if (!e) ++result.failed;

  const std::size_t d = config.dim();
  const auto& oracle = problem.oracle();
  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    const bool score = is_score_kind(pairs[pi].first.estimator);
    std::vector<CompareRow> prop_rows;
    for (int side = 0; side < 2; ++side) {
      const Arm& arm = side == 0 ? pairs[pi].first : pairs[pi].second;
      const std::size_t a = 2 * pi + static_cast<std::size_t>(side);
      std::vector<std::pair<std::size_t, std::optional<std::size_t>>> comps;
      for (std::size_t i = 0; i < d; ++i)
        if (score)
          comps.push_back({i, std::nullopt});
        else
          for (std::size_t j = 0; j < d; ++j) comps.push_back({i, j});
      for (std::size_t ci = 0; ci < comps.size(); ++ci) {
        const auto [i, j] = comps[ci];
        const auto ii = static_cast<Eigen::Index>(i);
        std::vector<double> vals;
        for (std::size_t r = 0; r < R; ++r) {
          const auto& e = estimates[a * R + r];
          if (!e) continue;
          vals.push_back(j ? e->oim(ii, static_cast<Eigen::Index>(*j)) : e->score(ii));
        }
        CompareRow row;
        row.method = to_string(arm.estimator);
        row.i = i + 1;
        if (j) row.j = *j + 1;
        row.tau = arm.point.tau;
        row.h = arm.point.h;
        row.n_particles = arm.point.n;
        row.budget = arm.budget;
        row.replications = vals.size();
        const auto [mean, var] = mean_var(vals);
        row.mean_estimate = mean;
        row.variance = var;
        if (oracle) {
          const double truth = j ? oracle->oim(ii, static_cast<Eigen::Index>(*j)) : oracle->score(ii);
          row.oracle = truth;
          row.bias = mean - truth;
          double s = 0.0;
          for (double v : vals) s += (v - truth) * (v - truth);
          row.mse = vals.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(vals.size());
        }
        if (side == 0)
          prop_rows.push_back(row);
        else
          row.variance_ratio = row.variance / prop_rows[ci].variance;
        result.rows.push_back(std::move(row));
      }
    }
  }
  return result;
}

void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& out) {
  const auto opt = [](const auto& v) -> std::string {
    if (!v) return {};
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(*v)>>)
      return format_double(*v);
    else
      return std::to_string(*v);
  };
  out << kCompareVersionLine << '\n' << kCompareHeader << '\n';
  for (const auto& r : rows)
    out << r.method << ',' << r.i << ',' << opt(r.j) << ',' << opt(r.tau) << ',' << opt(r.h) << ','
        << opt(r.n_particles) << ',' << r.budget << ',' << r.replications << ',' << format_double(r.mean_estimate)
        << ',' << opt(r.oracle) << ',' << opt(r.bias) << ',' << format_double(r.variance) << ',' << opt(r.mse) << ','
        << opt(r.variance_ratio) << '\n';
}

std::vector<SweepSlope> sweep_slopes(const std::vector<RunRecord>& records, Command command) {
  std::map<std::tuple<std::string, std::size_t, std::size_t>, std::vector<RunRecord>> groups;
  std::vector<std::tuple<std::string, std::size_t, std::size_t>> order;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.method, r.i, r.j.value_or(0));
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(r);
  }
  std::vector<SweepSlope> out;
  for (const auto& key : order) {
    SweepSlope s;
    s.method = std::get<0>(key);
    s.i = std::get<1>(key);
    if (std::get<2>(key) != 0) s.j = std::get<2>(key);
    switch (command) {
      case Command::sweep_n: s.x = XField::n_particles; break;
      case Command::sweep_lag: s.x = XField::delta; break;
      default: s.x = s.method.rfind("fd-", 0) == 0 ? XField::h : XField::tau; break;
    }
    try {
      s.fit = fit_rate_slope(groups[key], s.x, YAggregate::mse);
    } catch (const std::invalid_argument&) {
      s.fit.reset();
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace dfscore::harness
