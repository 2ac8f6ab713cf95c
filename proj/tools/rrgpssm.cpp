// rrgpssm: command line front end for learning, evaluation, forecasting and
// the synthetic benchmarks.

#include "rrgp/experiment.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <memory>

namespace {

using rrgp::ExperimentConfig;
using rrgp::ExperimentMode;
using Applier = std::function<void(ExperimentConfig&)>;

struct Subcommand {
  CLI::App* app = nullptr;
  ExperimentMode mode{};
  std::string config_file;
  std::vector<Applier> appliers;

  template <typename T, typename Set>
  void option(const std::string& name, const std::string& help, Set set) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    appliers.push_back([opt, value, set](ExperimentConfig& c) {
      if (opt->count() > 0) set(c, *value);
    });
  }

  void flag(const std::string& name, const std::string& help, bool ExperimentConfig::*field) {
    CLI::Option* opt = app->add_flag(name, help);
    appliers.push_back([opt, field](ExperimentConfig& c) {
      if (opt->count() > 0) c.*field = true;
    });
  }
};

void register_options(Subcommand& s) {
  using C = ExperimentConfig;
  s.app->add_option("--config", s.config_file, "JSON config or run manifest; flags override it")
      ->check(CLI::ExistingFile);
  s.option<std::string>("--data", "CSV with columns t,u*,y*[,x*]", [](C& c, auto v) { c.data_path = v; });
  s.option<std::string>("--eval-data", "held-out CSV", [](C& c, auto v) { c.eval_path = v; });
  s.option<std::string>("--chain", "existing chain file", [](C& c, auto v) { c.chain_path = v; });
  s.option<std::string>("-o,--output", "output directory", [](C& c, auto v) { c.output_dir = v; });
  s.option<int>("--n-x", "state dimension", [](C& c, auto v) { c.n_x = v; });
  s.option<std::vector<int>>("-m,--basis", "basis functions per state dimension",
                             [](C& c, auto v) { c.basis = v; });
  s.option<std::vector<double>>("-L,--half-widths", "domain half-widths (default: pilot filter)",
                                [](C& c, auto v) { c.half_widths = v; });
  s.option<double>("--domain-factor", "L = factor x pilot bound", [](C& c, auto v) { c.domain_factor = v; });
  s.option<std::string>("--kernel", "se or matern", [](C& c, auto v) { c.kernel = v; });
  s.option<double>("--nu", "Matern smoothness", [](C& c, auto v) { c.matern_nu = v; });
  s.option<std::vector<int>>("--input-basis", "basis functions per input",
                             [](C& c, auto v) { c.input_basis = v; });
  s.option<std::vector<double>>("--input-half-widths", "input domain half-widths",
                                [](C& c, auto v) { c.input_half_widths = v; });
  s.option<std::vector<double>>("--obs-r", "diagonal of the observation noise R", [](C& c, auto v) {
    c.obs_R = Eigen::Map<const rrgp::Vector>(v.data(), static_cast<Eigen::Index>(v.size())).asDiagonal();
  });
  s.flag("--learn-observation", "sample C and R as well", &C::learn_observation);
  s.option<double>("--q-dof", "inverse-Wishart degrees of freedom for Q", [](C& c, auto v) { c.q_dof = v; });
  s.option<double>("--q-scale", "inverse-Wishart scale (times identity)", [](C& c, auto v) { c.q_scale = v; });
  s.option<double>("--theta-prior-mean", "prior mean of log hyperparameters",
                   [](C& c, auto v) { c.theta_prior_mean = v; });
  s.option<double>("--theta-prior-std", "prior std of log hyperparameters",
                   [](C& c, auto v) { c.theta_prior_std = v; });
  s.option<std::vector<double>>("--theta-init", "initial hyperparameters (natural scale)",
                                [](C& c, auto v) { c.theta_init = v; });
  s.option<std::string>("--init-states", "bootstrap or observations",
                        [](C& c, auto v) { c.init_states = v; });
  s.option<int>("-K,--iterations", "Gibbs sweeps", [](C& c, auto v) { c.iterations = v; });
  s.option<int>("-N,--particles", "PGAS particles", [](C& c, auto v) { c.particles = v; });
  s.option<double>("--burn-in", "fraction of records discarded", [](C& c, auto v) { c.burn_in = v; });
  s.option<double>("--mh-scale", "random-walk std on log theta", [](C& c, auto v) { c.mh_scale = v; });
  s.option<int>("--mh-steps", "MH steps per sweep", [](C& c, auto v) { c.mh_steps = v; });
  s.option<int>("--adapt", "sweeps with proposal-scale adaptation", [](C& c, auto v) { c.adapt_iterations = v; });
  s.option<std::string>("--theta-target", "conditional or conjugate_product",
                        [](C& c, auto v) { c.theta_target = v; });
  s.option<std::string>("--protocol", "auto, one_step, free_run or filter", [](C& c, auto v) { c.protocol = v; });
  s.option<int>("--samples", "predictive draws per record (0: closed form)",
                [](C& c, auto v) { c.predictive_samples = v; });
  s.option<int>("-k,--horizon", "forecast horizon", [](C& c, auto v) { c.horizon = v; });
  s.option<int>("--filter-particles", "particles for forecasting filters",
                [](C& c, auto v) { c.filter_particles = v; });
  s.option<long>("--train-length", "benchmark training length", [](C& c, auto v) { c.train_length = v; });
  s.option<long>("--eval-length", "benchmark evaluation length", [](C& c, auto v) { c.eval_length = v; });
  s.option<std::uint64_t>("--seed", "base seed", [](C& c, auto v) { c.seed = v; });
  s.option<int>("--chains", "independent runs with seeds seed + r", [](C& c, auto v) { c.chains = v; });
  s.option<int>("--threads", "runs executed concurrently", [](C& c, auto v) { c.threads = v; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian learning of reduced-rank GP state space models"};
  app.set_version_flag("--version", rrgp::kToolVersion);
  app.require_subcommand(1);

  std::vector<std::unique_ptr<Subcommand>> subs;
  const auto add = [&](const char* name, const char* help, ExperimentMode mode) {
    auto s = std::make_unique<Subcommand>();
    s->app = app.add_subcommand(name, help);
    s->mode = mode;
    register_options(*s);
    subs.push_back(std::move(s));
  };
  add("learn", "sample the posterior from a CSV data set", ExperimentMode::Learn);
  add("forecast", "k-step particle-filter forecasts from a chain (learned first if absent)",
      ExperimentMode::Forecast);
  add("eval", "evaluate an existing chain on a CSV data set", ExperimentMode::Eval);
  add("bench1", "tanh benchmark", ExperimentMode::Benchmark1);
  add("bench2", "kink benchmark", ExperimentMode::Benchmark2);

  CLI11_PARSE(app, argc, argv);

  for (const auto& s : subs) {
    if (!s->app->parsed()) continue;
    ExperimentConfig config;
    try {
      config = rrgp::default_config(s->mode);
      if (!s->config_file.empty()) config = rrgp::load_config(s->config_file, config);
      config.mode = s->mode;
      for (const auto& apply : s->appliers) apply(config);
      config.validate();
    } catch (const std::exception& e) {
      std::cerr << "usage error: " << e.what() << "\n" << s->app->help();
      return 2;
    }
    try {
      const rrgp::ExperimentResult result = rrgp::run_experiment(config, std::cerr);
      rrgp::Json brief = result.metrics;
      brief.erase("per_run");
      std::cout << brief.dump(2) << std::endl;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << std::endl;
      return 1;
    }
  }
  return 0;
}
