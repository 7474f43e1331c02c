#include "dfscore/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dfscore/csv.hpp"
#include "dfscore/errors.hpp"

namespace dfscore::harness {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"model", {"type", "theta", "y", "obs_sd", "phi", "sigma_v", "sigma_w", "init", "init_mean",
                 "init_var", "free"}},
      {"data", {"T", "true_theta", "seed", "path", "loglik", "loglik_particles"}},
      {"estimators", {"methods", "kernel_sigmas", "resampling", "ess_trigger"}},
      {"grid", {"tau", "n", "lag", "h", "tau_exponent", "tau_scale", "h_exponent", "h_scale"}},
      {"run", {"replications", "seed", "threads", "timing"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  std::string text(const std::string& key) const {
    auto v = raw(key);
    if (!v || v->empty()) throw ConfigError(key, "required key missing");
    return *v;
  }

  double number(const std::string& key) const { return to_number(key, text(key)); }

  std::optional<double> maybe_number(const std::string& key) const {
    auto v = raw(key);
    if (!v) return std::nullopt;
    return to_number(key, *v);
  }

  std::uint64_t unsigned_int(const std::string& key) const { return to_unsigned(key, text(key)); }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(text(key))) out.push_back(to_number(key, item));
    if (out.empty()) throw ConfigError(key, "list must be non-empty");
    return out;
  }

  std::vector<std::size_t> unsigned_ints(const std::string& key) const {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(text(key))) out.push_back(to_unsigned(key, item));
    if (out.empty()) throw ConfigError(key, "list must be non-empty");
    return out;
  }

  bool has(const std::string& key) const { return raw(key).has_value(); }

 private:
  static double to_number(const std::string& key, const std::string& text) {
    try {
      const double v = parse_double(text);
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
      return v;
    } catch (const std::invalid_argument&) {
      throw ConfigError(key, "expected a finite number, got '" + text + "'");
    }
  }
  static std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError(key, "expected a non-negative integer, got '" + text + "'");
    try {
      return std::stoull(text);
    } catch (const std::exception&) {
      throw ConfigError(key, "integer out of range: '" + text + "'");
    }
  }

  const pt::ptree& tree_;
};

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

void require_positive(const std::string& key, const std::vector<double>& values) {
  for (double v : values)
    if (!(v > 0.0)) throw ConfigError(key, "values must be > 0");
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::gaussian: return "gaussian";
    case ModelKind::poisson: return "poisson";
    case ModelKind::quartic: return "quartic";
    case ModelKind::lgssm: return "lgssm";
    case ModelKind::lognormal_shock: return "lognormal-shock";
  }
  return "?";
}

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::is_score: return "is-score";
    case Estimator::is_oim: return "is-oim";
    case Estimator::fd_score: return "fd-score";
    case Estimator::fd_oim: return "fd-oim";
    case Estimator::smc_score: return "smc-score";
    case Estimator::smc_oim: return "smc-oim";
    case Estimator::quad_score: return "quad-score";
    case Estimator::quad_oim: return "quad-oim";
    case Estimator::oracle: return "oracle";
  }
  return "?";
}

Estimator estimator_from_string(const std::string& name) {
  for (Estimator e : {Estimator::is_score, Estimator::is_oim, Estimator::fd_score, Estimator::fd_oim,
                      Estimator::smc_score, Estimator::smc_oim, Estimator::quad_score,
                      Estimator::quad_oim, Estimator::oracle})
    if (to_string(e) == name) return e;
  throw std::invalid_argument("unknown estimator '" + name + "'");
}

bool is_score_kind(Estimator e) {
  return e == Estimator::is_score || e == Estimator::fd_score || e == Estimator::smc_score ||
         e == Estimator::quad_score;
}

bool is_state_space(ModelKind kind) { return kind == ModelKind::lgssm || kind == ModelKind::lognormal_shock; }

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("file", "line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside any section");
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) throw ConfigError(section, "unknown section");
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) throw ConfigError(section + "." + key, "unknown key");
  }

  const Reader r(tree);
  ExperimentConfig c;

  const std::string type = r.text("model.type");
  if (type == "gaussian") c.model = ModelKind::gaussian;
  else if (type == "poisson") c.model = ModelKind::poisson;
  else if (type == "quartic") c.model = ModelKind::quartic;
  else if (type == "lgssm") c.model = ModelKind::lgssm;
  else if (type == "lognormal-shock") c.model = ModelKind::lognormal_shock;
  else throw ConfigError("model.type", "unknown model '" + type + "'");

  c.theta = to_vector(r.numbers("model.theta"));
  const std::size_t d = c.dim();

  if (c.model == ModelKind::gaussian || c.model == ModelKind::poisson) {
    c.y = r.numbers("model.y");
    if (c.y.size() != d) throw ConfigError("model.y", "needs one value per theta coordinate");
  }
  if (c.model == ModelKind::gaussian) {
    c.obs_sd = r.has("model.obs_sd") ? r.numbers("model.obs_sd") : std::vector<double>(d, 1.0);
    if (c.obs_sd.size() != d) throw ConfigError("model.obs_sd", "needs one value per theta coordinate");
    require_positive("model.obs_sd", c.obs_sd);
  }

  if (is_state_space(c.model)) {
    if (auto v = r.maybe_number("model.phi")) c.ar.phi = *v;
    if (auto v = r.maybe_number("model.sigma_v")) c.ar.sigma_v = *v;
    if (auto v = r.maybe_number("model.sigma_w")) c.ar.sigma_w = *v;
    if (auto v = r.maybe_number("model.init_mean")) c.ar.init_mean = *v;
    if (auto v = r.maybe_number("model.init_var")) c.ar.init_var = *v;
    if (auto v = r.raw("model.init")) {
      if (*v == "stationary") c.ar.stationary_init = true;
      else if (*v == "fixed") c.ar.stationary_init = false;
      else throw ConfigError("model.init", "expected 'stationary' or 'fixed'");
    }
    if (r.has("model.free")) {
      c.ar.free.clear();
      try {
        for (const auto& name : split_list(r.text("model.free"))) c.ar.free.push_back(ar_param_from_string(name));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("model.free", e.what());
      }
    }
    try {
      ArParameterization check(c.ar);
      if (check.dim() != d) throw ConfigError("model.theta", "length must equal the number of free parameters");
      check.values({c.theta.data(), d});
    } catch (const std::invalid_argument& e) {
      throw ConfigError("model.free", e.what());
    } catch (const std::domain_error& e) {
      throw ConfigError("model.theta", e.what());
    }

    c.horizon = r.unsigned_int("data.T");
    if (c.horizon < 1) throw ConfigError("data.T", "must be >= 1");
    c.true_theta = r.has("data.true_theta") ? to_vector(r.numbers("data.true_theta")) : c.theta;
    if (static_cast<std::size_t>(c.true_theta.size()) != d)
      throw ConfigError("data.true_theta", "length must equal theta");
    if (r.has("data.seed")) c.data_seed = r.unsigned_int("data.seed");
    if (auto v = r.raw("data.path")) c.data_path = *v;
    if (auto v = r.raw("data.loglik")) {
      if (*v == "kalman") c.loglik = LoglikSource::kalman;
      else if (*v == "smc") c.loglik = LoglikSource::smc;
      else throw ConfigError("data.loglik", "expected 'kalman' or 'smc'");
    }
    if (c.model == ModelKind::lognormal_shock) c.loglik = LoglikSource::smc;
    if (r.has("data.loglik_particles")) c.loglik_particles = r.unsigned_int("data.loglik_particles");
    if (c.loglik_particles < 2) throw ConfigError("data.loglik_particles", "must be >= 2");
  }

  try {
    for (const auto& name : split_list(r.text("estimators.methods")))
      c.estimators.push_back(estimator_from_string(name));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("estimators.methods", e.what());
  }
  if (c.estimators.empty()) throw ConfigError("estimators.methods", "list must be non-empty");
  c.kernel_sigmas = r.has("estimators.kernel_sigmas") ? r.numbers("estimators.kernel_sigmas")
                                                      : std::vector<double>(d, 1.0);
  if (c.kernel_sigmas.size() != d) throw ConfigError("estimators.kernel_sigmas", "needs one value per theta coordinate");
  require_positive("estimators.kernel_sigmas", c.kernel_sigmas);
  if (auto v = r.raw("estimators.resampling")) {
    try {
      c.resampling = resampling_scheme_from_string(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("estimators.resampling", e.what());
    }
  }
  c.ess_trigger = r.maybe_number("estimators.ess_trigger");
  if (c.ess_trigger && !(*c.ess_trigger > 0.0 && *c.ess_trigger <= 1.0))
    throw ConfigError("estimators.ess_trigger", "must lie in (0, 1]");

  auto uses = [&](std::initializer_list<Estimator> set) {
    return std::any_of(c.estimators.begin(), c.estimators.end(), [&](Estimator e) {
      return std::find(set.begin(), set.end(), e) != set.end();
    });
  };
  const bool uses_smc = uses({Estimator::smc_score, Estimator::smc_oim});
  const bool uses_is = uses({Estimator::is_score, Estimator::is_oim});
  const bool uses_quad = uses({Estimator::quad_score, Estimator::quad_oim});
  const bool uses_fd = uses({Estimator::fd_score, Estimator::fd_oim});

  if (uses_smc && !is_state_space(c.model))
    throw ConfigError("estimators.methods", "smc-* estimators need a state-space model");
  if (uses_quad && (is_state_space(c.model) || d > 2))
    throw ConfigError("estimators.methods", "quad-* estimators need a general model with d <= 2");
  if (uses({Estimator::oracle}) && c.model == ModelKind::lognormal_shock)
    throw ConfigError("estimators.methods", "no oracle exists for lognormal-shock");

  c.tau_exponent = r.maybe_number("grid.tau_exponent");
  if (auto v = r.maybe_number("grid.tau_scale")) c.tau_scale = *v;
  if (!(c.tau_scale > 0.0)) throw ConfigError("grid.tau_scale", "must be > 0");
  c.h_exponent = r.maybe_number("grid.h_exponent");
  if (auto v = r.maybe_number("grid.h_scale")) c.h_scale = *v;
  if (!(c.h_scale > 0.0)) throw ConfigError("grid.h_scale", "must be > 0");

  const bool needs_n = uses_is || uses_smc || c.tau_exponent || c.h_exponent ||
                       (uses_fd && is_state_space(c.model) && c.loglik == LoglikSource::smc);
  if (needs_n || r.has("grid.n")) {
    c.n = r.unsigned_ints("grid.n");
    for (std::size_t v : c.n)
      if (v < 2) throw ConfigError("grid.n", "values must be >= 2");
  }
  if (((uses_is || uses_smc || uses_quad) && !c.tau_exponent) || r.has("grid.tau")) {
    c.tau = r.numbers("grid.tau");
    require_positive("grid.tau", c.tau);
  }
  if (uses_quad && c.tau_exponent && c.tau.empty())
    throw ConfigError("grid.tau", "quad-* estimators need an explicit tau grid");
  if ((uses_fd && !c.h_exponent) || r.has("grid.h")) {
    c.h = r.numbers("grid.h");
    require_positive("grid.h", c.h);
  }
  if (uses_smc || r.has("grid.lag")) c.lag = r.unsigned_ints("grid.lag");

  if (r.has("run.replications")) c.replications = r.unsigned_int("run.replications");
  if (c.replications < 1) throw ConfigError("run.replications", "must be >= 1");
  if (r.has("run.seed")) c.seed = r.unsigned_int("run.seed");
  if (r.has("run.threads")) c.threads = r.unsigned_int("run.threads");
  if (c.threads < 1) throw ConfigError("run.threads", "must be >= 1");
  if (auto v = r.raw("run.timing")) {
    if (*v == "true") c.timing = true;
    else if (*v == "false") c.timing = false;
    else throw ConfigError("run.timing", "expected 'true' or 'false'");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  return parse_config(in);
}

}  // namespace dfscore::harness
