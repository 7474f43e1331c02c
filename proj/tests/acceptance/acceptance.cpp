// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "dfscore/general.hpp"
#include "dfscore/harness/config.hpp"
#include "dfscore/harness/experiment.hpp"
#include "dfscore/harness/slope.hpp"
#include "dfscore/lgssm.hpp"
#include "dfscore/smc.hpp"

namespace fs = std::filesystem;
using namespace dfscore;
using namespace dfscore::harness;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::vector<RunRecord> select(const std::vector<RunRecord>& records, const std::string& method,
                              std::size_t i, std::optional<std::size_t> j = {}) {
  std::vector<RunRecord> out;
  for (const auto& r : records)
    if (r.method == method && r.i == i && r.j == j) out.push_back(r);
  return out;
}

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

Summary summarize(const std::vector<double>& v) {
  Summary s;
  s.n = v.size();
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(s.n);
  for (double x : v) s.sd += (x - s.mean) * (x - s.mean);
  s.sd = s.n > 1 ? std::sqrt(s.sd / static_cast<double>(s.n - 1)) : 0.0;
  return s;
}

// ---------------------------------------------------------------------------
// 1, 2: quadrature on the conjugate Gaussian

const char* kConjugate = R"(
[model]
type = gaussian
theta = 1.0
y = 0.0
obs_sd = 1.0
[estimators]
methods = %s
kernel_sigmas = 1.0
[grid]
tau = 0.4, 0.2, 0.1, 0.05
)";

void conjugate_bias_order(int id, const std::string& method) {
  const auto start = Clock::now();
  const auto config = parse(fmt(kConjugate, method.c_str()));
  const auto result = run_experiment(config, Command::sweep_tau);
  const double elapsed = seconds_since(start);
  const bool oim = method == "quad-oim";
  const auto rows = oim ? select(result.records, method, 1, 1) : select(result.records, method, 1);
  const auto fit = fit_rate_slope(rows, XField::tau, YAggregate::abs_bias);
  bool pass = result.failed == 0 && fit.slope >= 1.9 && fit.slope <= 2.1 && elapsed < 1.0;
  std::string detail = fmt("%s |bias| slope vs tau %.4f (want [1.9, 2.1]), %.3f s (limit 1 s)",
                           method.c_str(), fit.slope, elapsed);
  if (oim) {
    double at_01 = NAN;
    for (const auto& r : rows)
      if (r.tau && *r.tau == 0.1 && r.estimate) at_01 = *r.estimate;
    const double want = 1.0 / (1.0 + 0.01);
    pass = pass && std::abs(at_01 - want) <= 1e-6;
    detail += fmt("; tau=0.1 estimate %.9f vs 1/(1+tau^2) %.9f", at_01, want);
  }
  report(id, pass, detail);
}

// ---------------------------------------------------------------------------
// 3: IS MSE rates with tau tied to N

const char* kIsRate = R"(
[model]
type = gaussian
theta = 1.0
y = 0.0
obs_sd = 1.0
[estimators]
methods = %s
kernel_sigmas = 1.0
[grid]
n = 1000, 10000, 100000, 1000000
tau_exponent = %.17g
[run]
replications = 200
seed = 3
)";

void is_rates() {
  const auto start = Clock::now();
  const auto score = run_experiment(parse(fmt(kIsRate, "is-score", 1.0 / 6.0)), Command::sweep_n);
  const auto oim = run_experiment(parse(fmt(kIsRate, "is-oim", 1.0 / 8.0)), Command::sweep_n);
  const double elapsed = seconds_since(start);
  const auto fs = fit_rate_slope(select(score.records, "is-score", 1), XField::n_particles, YAggregate::mse);
  const auto fo = fit_rate_slope(select(oim.records, "is-oim", 1, 1), XField::n_particles, YAggregate::mse);
  const bool pass = score.failed == 0 && oim.failed == 0 && fs.slope >= -0.80 && fs.slope <= -0.50 &&
                    fo.slope >= -0.65 && fo.slope <= -0.35 && elapsed < 600.0;
  report(3, pass,
         fmt("score MSE slope %.3f +- %.3f (want [-0.80, -0.50]), OIM MSE slope %.3f +- %.3f "
             "(want [-0.65, -0.35]), R=200, %.1f s (limit 600 s)",
             fs.slope, fs.stderr_, fo.slope, fo.stderr_, elapsed));
}

// ---------------------------------------------------------------------------
// 4, 5: SMC estimators against the Kalman oracle

// phi only, fixed initial law so perturbed draws with |phi| >= 1 stay
// admissible. Sigma is set per criterion.
const char* kLgssm = R"(
[model]
type = lgssm
theta = 0.6
free = phi
init = fixed
init_var = 2.5
[data]
T = 50
true_theta = 0.8
seed = 2
[estimators]
methods = %s
kernel_sigmas = %g
resampling = systematic
[grid]
tau = 0.05
n = %zu
lag = %s
[run]
replications = %zu
seed = 11
)";

std::string lgssm_config(const std::string& method, double sigma, std::size_t n = 5000,
                         const std::string& lags = "10", std::size_t reps = 20) {
  return fmt(kLgssm, method.c_str(), sigma, n, lags.c_str(), reps);
}

DerivativeOracle lgssm_oracle(const ExperimentConfig& config) {
  const LinearGaussianModel model(config.ar);
  return kalman_score_oim_oracle(model, config.theta, experiment_data(config));
}

void smc_score_vs_kalman() {
  constexpr double kSigma = 2.0;
  const auto config = parse(lgssm_config("smc-score", kSigma));
  const auto oracle = lgssm_oracle(config);
  const auto start = Clock::now();
  const auto result = run_experiment(config);
  const double elapsed = seconds_since(start);

  bool pass = result.failed == 0 && elapsed < 120.0;
  std::string detail;
  for (std::size_t i = 1; i <= config.dim(); ++i) {
    std::vector<double> est;
    for (const auto& r : select(result.records, "smc-score", i)) est.push_back(*r.estimate);
    const auto s = summarize(est);
    const double truth = oracle.score.values(static_cast<Eigen::Index>(i - 1));
    const double rel = std::abs(s.mean - truth) / std::abs(truth);
    pass = pass && rel <= 0.15;
    detail += fmt("S[%zu] mean %.3f vs oracle %.3f (rel err %.3f, want <= 0.15)", i, s.mean, truth, rel);
    if (std::abs(truth) > oracle.score_error) {
      const auto agree = std::count_if(est.begin(), est.end(),
                                       [&](double e) { return std::signbit(e) == std::signbit(truth); });
      const double frac = static_cast<double>(agree) / static_cast<double>(est.size());
      pass = pass && frac >= 0.95;
      detail += fmt(", sign agreement %.2f (want >= 0.95)", frac);
    }
    detail += "; ";
  }
  detail += fmt("Sigma=%g, R=20, %.1f s (limit 120 s)", kSigma * kSigma, elapsed);
  report(4, pass, detail);
}

void smc_oim_vs_kalman() {
  constexpr double kSigma = 5.0;
  const auto config = parse(lgssm_config("smc-oim", kSigma));
  const auto oracle = lgssm_oracle(config);
  const auto start = Clock::now();
  const auto result = run_experiment(config);
  const double elapsed = seconds_since(start);

  bool pass = result.failed == 0 && elapsed < 180.0;
  std::string detail;
  for (std::size_t i = 1; i <= config.dim(); ++i) {
    std::vector<double> est;
    for (const auto& r : select(result.records, "smc-oim", i, i)) est.push_back(*r.estimate);
    const auto s = summarize(est);
    const auto k = static_cast<Eigen::Index>(i - 1);
    const double truth = oracle.oim.values(k, k);
    const double rel = std::abs(s.mean - truth) / std::abs(truth);
    pass = pass && s.mean > 0.0 && rel <= 0.25;
    detail += fmt("I[%zu,%zu] mean %.2f (sd %.2f) vs oracle %.2f (rel err %.3f, want > 0 and <= 0.25); ", i,
                  i, s.mean, s.sd, truth, rel);
  }
  // Symmetry: records carry every (i, j); compare them bitwise.
  bool symmetric = true;
  for (const auto& a : result.records)
    if (a.method == "smc-oim" && a.j)
      for (const auto& b : result.records)
        if (b.run_id == a.run_id && b.method == a.method && b.j && b.i == *a.j && *b.j == a.i)
          symmetric = symmetric && *a.estimate == *b.estimate;
  // The scalar case above is trivially symmetric, so also check a
  // three-parameter filter run directly.
  LgssmSpec spec = config.ar;
  spec.free = {ArParam::phi, ArParam::log_sigma_v, ArParam::log_sigma_w};
  const LinearGaussianModel model3(spec);
  const auto data = experiment_data(config);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ExtendedFilterConfig fc;
    fc.theta = Vector::Zero(3);
    fc.theta << 0.6, 0.0, 0.0;
    fc.tau = 0.05;
    fc.kernel = PerturbationKernel({2.0, 2.0, 2.0});
    fc.lag = 10;
    fc.n_particles = 1000;
    fc.seed = seed;
    const auto m = oim_ssm(run_extended_bootstrap(model3, data, fc), fc.tau, fc.kernel).values;
    for (Eigen::Index r = 0; r < 3; ++r)
      for (Eigen::Index c = 0; c < 3; ++c) symmetric = symmetric && m(r, c) == m(c, r);
  }
  pass = pass && symmetric;
  detail += fmt("exactly symmetric: %s; Sigma=%g, R=20, %.1f s (limit 180 s)", symmetric ? "yes" : "no",
                kSigma * kSigma, elapsed);
  report(5, pass, detail);
}

// ---------------------------------------------------------------------------
// 6: fixed-lag gap against full smoothing, paired by seed

void lag_decay() {
  const std::vector<std::size_t> lags = {0, 2, 5, 10, 20};
  constexpr std::size_t kReps = 50;
  const auto config = parse(lgssm_config("smc-score", 2.0, 10000, "0, 2, 5, 10, 20, 49", kReps));
  const LinearGaussianModel model(config.ar);
  const auto data = experiment_data(config);
  const std::size_t full = data.length() - 1;
  const PerturbationKernel kernel(config.kernel_sigmas);

  const auto start = Clock::now();
  std::vector<std::vector<double>> gap(lags.size(), std::vector<double>(kReps));
  for (std::size_t r = 0; r < kReps; ++r) {
    ExtendedFilterConfig fc;
    fc.theta = config.theta;
    fc.tau = config.tau.front();
    fc.kernel = kernel;
    fc.n_particles = config.n.front();
    fc.resampling = config.resampling;
    fc.seed = derive_seed(config.seed, r);
    fc.lag = full;
    const Vector ref = score_ssm(run_extended_bootstrap(model, data, fc), fc.theta, fc.tau, kernel).values;
    for (std::size_t k = 0; k < lags.size(); ++k) {
      fc.lag = lags[k];
      const Vector s = score_ssm(run_extended_bootstrap(model, data, fc), fc.theta, fc.tau, kernel).values;
      gap[k][r] = (s - ref).lpNorm<1>();
    }
  }
  const double elapsed = seconds_since(start);

  bool pass = true;
  std::string detail = "mean gaps";
  for (std::size_t k = 0; k < lags.size(); ++k)
    detail += fmt(" D=%zu:%.4f", lags[k], summarize(gap[k]).mean);
  detail += ";";
  for (std::size_t k = 0; k + 1 < lags.size(); ++k) {
    std::vector<double> diff(kReps);
    for (std::size_t r = 0; r < kReps; ++r) diff[r] = gap[k + 1][r] - gap[k][r];
    const auto d = summarize(diff);
    const double se = d.sd / std::sqrt(static_cast<double>(kReps));
    const bool ok = d.mean <= 2.0 * se;
    pass = pass && ok;
    detail += fmt(" step %zu->%zu %+.4f (2SE %.4f)%s", lags[k], lags[k + 1], d.mean, 2.0 * se, ok ? "" : " UP");
  }
  detail += fmt("; N=1e4, R=50, %.1f s", elapsed);
  report(6, pass, detail);
}

// ---------------------------------------------------------------------------
// 7: lag T-1 and lag 10T are the same smoother

void full_lag_equivalence() {
  const auto config = parse(lgssm_config("smc-score", 2.0));
  LgssmSpec spec = config.ar;
  spec.free = {ArParam::phi, ArParam::log_sigma_v};
  const LinearGaussianModel model(spec);
  const auto data = experiment_data(config);
  const std::size_t T = data.length();

  ExtendedFilterConfig fc;
  fc.theta = Vector::Zero(2);
  fc.theta << 0.6, 0.0;
  fc.tau = 0.05;
  fc.kernel = PerturbationKernel({2.0, 2.0});
  fc.n_particles = 2000;
  fc.seed = 99;
  fc.lag = T - 1;
  const auto a = run_extended_bootstrap(model, data, fc);
  fc.lag = 10 * T;
  const auto b = run_extended_bootstrap(model, data, fc);

  const bool same_readoff = a.readoff == b.readoff;
  bool same_values = a.mean == b.mean && a.var == b.var && a.crosscov.size() == b.crosscov.size() &&
                     a.loglik == b.loglik;
  for (std::size_t k = 0; same_values && k < a.crosscov.size(); ++k)
    same_values = a.crosscov[k].s == b.crosscov[k].s && a.crosscov[k].t == b.crosscov[k].t &&
                  a.crosscov[k].horizon == b.crosscov[k].horizon && a.crosscov[k].value == b.crosscov[k].value;
  const auto sa = score_ssm(a, fc.theta, fc.tau, fc.kernel).values;
  const auto sb = score_ssm(b, fc.theta, fc.tau, fc.kernel).values;
  const auto oa = oim_ssm(a, fc.tau, fc.kernel).values;
  const auto ob = oim_ssm(b, fc.tau, fc.kernel).values;
  const bool same_estimates = sa == sb && oa == ob;
  report(7, same_readoff && same_values && same_estimates,
         fmt("T=%zu, read-off horizons identical: %s, accumulators identical: %s, score/OIM bitwise equal: %s",
             T, same_readoff ? "yes" : "no", same_values ? "yes" : "no", same_estimates ? "yes" : "no"));
}

// ---------------------------------------------------------------------------
// 8: bootstrap likelihood against Kalman

void loglik_sanity() {
  const auto config = parse(lgssm_config("smc-score", 2.0));
  const LinearGaussianModel model(config.ar);
  const auto data = experiment_data(config);
  const double exact = kalman_loglik(model, config.theta, data);
  std::vector<double> est;
  for (std::uint64_t r = 0; r < 50; ++r)
    est.push_back(bootstrap_loglik(model, data, config.theta, 2000, ResamplingScheme::multinomial,
                                   derive_seed(17, r)));
  const auto s = summarize(est);
  const double se = s.sd / std::sqrt(static_cast<double>(s.n));
  const double z = (s.mean - exact) / se;
  report(8, std::abs(z) <= 3.0,
         fmt("mean %.4f vs Kalman %.4f, SE %.4f, z %.2f (want |z| <= 3), N=2000, 50 runs", s.mean, exact, se, z));
}

// ---------------------------------------------------------------------------
// 9: constant observation density

class FlatModel final : public StateSpaceModel {
 public:
  std::size_t param_dim() const override { return 2; }
  std::size_t state_dim() const override { return 1; }
  std::size_t obs_dim() const override { return 1; }
  void sample_initial(std::span<const double>, Rng& rng, std::span<double> x) const override {
    x[0] = rng.normal();
  }
  void sample_transition(std::span<const double> x_prev, std::span<const double> theta, Rng& rng,
                         std::span<double> x) const override {
    x[0] = theta[0] * x_prev[0] + std::exp(theta[1]) * rng.normal();
  }
  double obs_log_density(std::span<const double>, std::span<const double>,
                         std::span<const double>) const override {
    return -1.2345;
  }
  void sample_observation(std::span<const double> x, std::span<const double>, Rng&,
                          std::span<double> y) const override {
    y[0] = x[0];
  }
};

void flat_likelihood() {
  const FlatModel model;
  const auto data = ObservationSequence::scalar({0.3, -1.0, 2.0, 0.0, 5.0, -0.7, 1.1, 0.2});
  bool uniform = true;
  std::size_t steps = 0;
  for (auto scheme : {ResamplingScheme::multinomial, ResamplingScheme::systematic}) {
    ExtendedFilterConfig fc;
    fc.theta = Vector::Zero(2);
    fc.theta << 0.5, 0.0;
    fc.tau = 0.3;
    fc.kernel = PerturbationKernel({1.0, 1.0});
    fc.lag = 3;
    fc.n_particles = 777;
    fc.resampling = scheme;
    fc.seed = 4;
    run_extended_bootstrap(model, data, fc, [&](std::size_t, std::span<const double> w) {
      ++steps;
      for (double v : w) uniform = uniform && v == w[0];
    });
  }
  report(9, uniform && steps == 2 * data.length(),
         fmt("%zu filter steps observed, normalized weights bitwise uniform: %s", steps, uniform ? "yes" : "no"));
}

// ---------------------------------------------------------------------------
// 10: CLI determinism

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DFSCORE_CLI) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kCliGaussian = R"(
[model]
type = gaussian
theta = 1.0, -0.5
y = 0.0, 0.5
obs_sd = 1.0, 2.0
[estimators]
methods = is-score, is-oim, fd-score, fd-oim, quad-score, oracle
kernel_sigmas = 1.0, 0.5
[grid]
tau = 0.2, 0.1
n = 500, 2000
h = 0.1
[run]
replications = 3
seed = 21
threads = 2
)";

const char* kCliLgssm = R"(
[model]
type = lgssm
theta = 0.6, -0.2
free = phi, log_sigma_v
init = fixed
[data]
T = 25
true_theta = 0.8, 0.0
seed = 8
loglik = smc
loglik_particles = 200
[estimators]
methods = smc-score, smc-oim, fd-score, fd-oim, oracle
kernel_sigmas = 2.0, 2.0
[grid]
tau = 0.1, 0.05
n = 300, 600
lag = 0, 5, 24
h = 0.05
[run]
replications = 2
seed = 4
threads = 2
)";

void cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("dfscore_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::ofstream(dir / "gaussian.ini") << kCliGaussian;
  std::ofstream(dir / "lgssm.ini") << kCliLgssm;

  const std::vector<std::pair<std::string, std::string>> runs = {
      {"estimate", "gaussian"},  {"estimate", "lgssm"},   {"sweep-tau", "gaussian"},
      {"sweep-tau", "lgssm"},    {"sweep-n", "gaussian"}, {"sweep-n", "lgssm"},
      {"sweep-lag", "lgssm"},    {"compare-fd", "gaussian"}, {"compare-fd", "lgssm"},
      {"oracle", "gaussian"},    {"oracle", "lgssm"}};
  bool pass = true;
  std::string detail;
  for (const auto& [command, config] : runs) {
    std::string out[2];
    int codes[2];
    for (int k = 0; k < 2; ++k) {
      const auto path = dir / fmt("%s_%s_%d.csv", command.c_str(), config.c_str(), k);
      codes[k] = run_cli(command + " --config " + (dir / (config + ".ini")).string() + " --out " +
                         path.string());
      out[k] = read_file(path);
    }
    const bool same = codes[0] == 0 && codes[1] == 0 && !out[0].empty() && out[0] == out[1];
    pass = pass && same;
    if (!same) detail += fmt("%s/%s differs or failed (exit %d, %d); ", command.c_str(), config.c_str(), codes[0], codes[1]);
  }
  fs::remove_all(dir);
  report(10, pass, detail.empty() ? fmt("%zu command/config pairs byte-identical across two runs", runs.size()) : detail);
}

// ---------------------------------------------------------------------------
// 11: FD on a quadratic, and the compare-fd table

void fd_baselines() {
  // l(theta) = -sum (theta_i - y_i)^2 / (2 s_i^2): central differences are exact.
  const Vector y = (Vector(3) << 0.3, -1.0, 2.0).finished();
  const Vector s = (Vector(3) << 1.0, 2.0, 0.5).finished();
  const LogLikelihood quad = [&](const Vector& th, Rng&) {
    return -0.5 * ((th - y).array() / s.array()).square().sum();
  };
  const Vector theta = (Vector(3) << 1.0, -0.5, 0.25).finished();
  const FdConfig fd{0.25, 1};
  const Vector score = fd_score(quad, theta, fd).values;
  const Matrix oim = fd_oim(quad, theta, fd).values;
  const Vector score_exact = -((theta - y).array() / s.array().square()).matrix();
  const Matrix oim_exact = s.array().square().inverse().matrix().asDiagonal();
  const double err_s = (score - score_exact).cwiseAbs().maxCoeff();
  const double err_o = (oim - oim_exact).cwiseAbs().maxCoeff();
  const bool exact = err_s <= 1e-12 && err_o <= 1e-12;

  auto config = parse(R"(
[model]
type = lgssm
theta = 0.6, -0.3
free = phi, log_sigma_v
init = fixed
[data]
T = 50
true_theta = 0.8, 0.0
seed = 11
loglik = smc
[estimators]
methods = fd-score, fd-oim
kernel_sigmas = 2.0, 2.0
[grid]
tau = 0.05
n = 2000
lag = 10
h = 0.05
[run]
replications = 10
seed = 5
)");
  const auto table = compare_fd(config);
  std::ostringstream csv;
  write_compare_csv(table.rows, csv);
  std::printf("compare-fd on LGSSM (loglik=smc, matched budget):\n%s", csv.str().c_str());
  bool has_ratio = false;
  for (const auto& row : table.rows) has_ratio = has_ratio || row.variance_ratio.has_value();
  report(11, exact && !table.all_failed() && has_ratio,
         fmt("FD on quadratic h=0.25: max score err %.2e, max OIM err %.2e (want <= 1e-12); compare-fd "
             "table %zu rows, variance ratios present: %s",
             err_s, err_o, table.rows.size(), has_ratio ? "yes" : "no"));
}

void guarded(int id, const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded(1, [] { conjugate_bias_order(1, "quad-score"); });
  guarded(2, [] { conjugate_bias_order(2, "quad-oim"); });
  guarded(3, is_rates);
  guarded(4, smc_score_vs_kalman);
  guarded(5, smc_oim_vs_kalman);
  guarded(6, lag_decay);
  guarded(7, full_lag_equivalence);
  guarded(8, loglik_sanity);
  guarded(9, flat_likelihood);
  guarded(10, cli_determinism);
  guarded(11, fd_baselines);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
