// dfscore: derivative-free score / observed information experiments.
//
//   dfscore estimate   --config run.ini [--out runs.csv] [--seed S] [--threads K]
//   dfscore sweep-tau  ...   (likewise sweep-n, sweep-lag, compare-fd, oracle)
//
// CSV goes to --out, or stdout when it is absent. Warnings and slope fits go
// to stderr. Exit codes: 0 ok, 2 bad config or arguments, 3 every run failed.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dfscore/csv.hpp"
#include "dfscore/errors.hpp"
#include "dfscore/harness/config.hpp"
#include "dfscore/harness/experiment.hpp"

namespace {

using namespace dfscore;
using namespace dfscore::harness;

constexpr int kExitConfig = 2;
constexpr int kExitAllFailed = 3;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

const char* axis_name(XField x) {
  switch (x) {
    case XField::tau: return "tau";
    case XField::h: return "h";
    case XField::n_particles: return "n";
    case XField::delta: return "lag";
  }
  return "?";
}

void emit(const Options& opt, const std::string& csv) {
  if (opt.out.empty()) {
    std::cout << csv;
    return;
  }
  std::ofstream f(opt.out, std::ios::binary);
  if (!f) throw ConfigError("--out", "cannot write '" + opt.out + "'");
  f << csv;
}

int run(const std::string& name, const Options& opt) {
  ExperimentConfig config = load_config(opt.config);
  if (opt.seed) config.seed = *opt.seed;
  if (opt.threads) {
    if (*opt.threads < 1) throw ConfigError("--threads", "must be >= 1");
    config.threads = *opt.threads;
  }

  std::ostringstream csv;
  if (name == "compare-fd") {
    const CompareResult r = compare_fd(config);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    write_compare_csv(r.rows, csv);
    emit(opt, csv.str());
    if (r.failed) std::cerr << r.failed << " of " << r.tasks << " runs failed\n";
    return r.all_failed() ? kExitAllFailed : 0;
  }

  Command cmd = Command::estimate;
  if (name == "sweep-tau") cmd = Command::sweep_tau;
  else if (name == "sweep-n") cmd = Command::sweep_n;
  else if (name == "sweep-lag") cmd = Command::sweep_lag;
  else if (name == "oracle") cmd = Command::oracle;

  const ExperimentResult r = run_experiment(config, cmd);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  write_records_csv(r.records, csv);
  emit(opt, csv.str());
  if (r.failed) std::cerr << r.failed << " of " << r.tasks << " runs failed\n";

  if (cmd == Command::sweep_tau || cmd == Command::sweep_n || cmd == Command::sweep_lag) {
    for (const auto& s : sweep_slopes(r.records, cmd)) {
      std::cerr << "slope " << s.method << '[' << s.i;
      if (s.j) std::cerr << ',' << *s.j;
      std::cerr << "] log(mse) vs log(" << axis_name(s.x) << "): ";
      if (s.fit)
        std::cerr << format_double(s.fit->slope) << " +- " << format_double(s.fit->stderr_) << " (" << s.fit->points
                  << " points, " << s.fit->filtered << " filtered)\n";
      else
        std::cerr << "n/a\n";
    }
  }
  return r.all_failed() ? kExitAllFailed : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Derivative-free score and observed information estimation"};
  app.require_subcommand(1);

  Options opt;
  const char* commands[][2] = {
      {"estimate", "run every estimator over the full grid"},
      {"sweep-tau", "vary tau (h for fd-*) with the other axes pinned"},
      {"sweep-n", "vary the particle / draw count"},
      {"sweep-lag", "vary the fixed lag of smc-*"},
      {"compare-fd", "finite differences against the proposed estimators at matched budget"},
      {"oracle", "emit the exact score and observed information"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", opt.config, "experiment config (INI)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "CSV output path (default stdout)");
    sub->add_option("--seed", opt.seed, "override run.seed");
    sub->add_option("--threads", opt.threads, "override run.threads");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    return run(app.get_subcommands().front()->get_name(), opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
