#pragma once

// Experiment orchestration behind the rrgpssm command line tool. Every run
// writes into its own directory:
//   chain.ndjson    Gibbs records (learning modes)
//   metrics.json    {rmse, ll, T_e, protocol, burn_in, seed, ...}
//   predictive.csv  t, mean, var, lo95, hi95
//   manifest.json   config echo, tool version, seed and protocol notes
// Benchmark modes add summary.csv and plot data (f_posterior.csv, and for the
// tanh system weights.csv).

#include "rrgp/common.hpp"
#include "rrgp/dataset.hpp"
#include "rrgp/gibbs.hpp"
#include "rrgp/serialization.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rrgp {

inline constexpr const char* kToolVersion = "0.1.0";

enum class ExperimentMode { Learn, Forecast, Eval, Benchmark1, Benchmark2 };

std::string to_string(ExperimentMode mode);
/// Accepts "learn", "forecast", "eval", "benchmark1"/"bench1", "benchmark2"/"bench2".
ExperimentMode experiment_mode_from_string(const std::string& name);

struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::Learn;

  std::string data_path;   // training data (learn, forecast) or evaluation data (eval)
  std::string eval_path;   // held-out data; in-sample evaluation when empty
  std::string chain_path;  // existing chain file (eval, forecast)
  std::string output_dir = "run";

  // Model.
  int n_x = 1;
  std::vector<int> basis{20};       // basis functions per state dimension
  std::vector<double> half_widths;  // empty: sized by a pilot filter
  double domain_factor = 4.0;       // L = factor x pilot bound
  std::string kernel = "se";        // "se" or "matern"
  double matern_nu = 1.5;
  std::vector<int> input_basis;          // per input; empty: 8 each
  std::vector<double> input_half_widths; // empty: 1.5 x max |u|
  Matrix obs_C;  // empty: identity (first n_y states observed)
  Matrix obs_R;  // empty: identity
  bool learn_observation = false;
  double r_dof = 10.0;
  double r_scale = 1.0;
  double c_precision = 1.0;

  // Priors.
  double q_dof = 10.0;
  double q_scale = 1.0;  // Lambda_Q = q_scale * I
  double theta_prior_mean = 0.0;
  double theta_prior_std = 2.0;
  std::vector<double> theta_init;  // natural scale; empty: prior draw
  /// "bootstrap": one particle filter pass under the initial parameters;
  /// "observations": least-squares inversion x = C^+ y.
  std::string init_states = "bootstrap";

  // Sampler.
  int iterations = 200;
  int particles = 20;
  double burn_in = 0.25;
  double mh_scale = 0.1;
  int mh_steps = 1;
  int adapt_iterations = 0;
  std::string theta_target = "conditional";

  // Evaluation.
  std::string protocol = "auto";  // auto | one_step | free_run | filter
  int predictive_samples = 0;     // per record; 0 uses closed-form moments where possible
  int horizon = 4;
  int filter_particles = 200;

  // Benchmarks and replication.
  long train_length = 500;
  long eval_length = 1000;
  std::uint64_t seed = 1;
  int chains = 1;
  int threads = 1;

  void validate() const;
};

/// Mode presets: benchmark modes fix the kernel, domain and horizons.
ExperimentConfig default_config(ExperimentMode mode);

Json config_to_json(const ExperimentConfig& config);
/// Keys present in `j` override `base`; unknown keys are rejected. A run
/// manifest (an object with a "config" member) is accepted as well.
ExperimentConfig config_from_json(const Json& j, ExperimentConfig base);
ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base);

/// Independent substream seeds derived from a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Half-widths from a bootstrap filter run with A = 0 and Q at its prior
/// mean: factor x max_t (|filtered mean| + 3 filtered sd), per dimension.
Vector pilot_half_widths(const RowMatrix& observations, const RowMatrix& inputs,
                         const ObservationModel& observation, const PriorSpec& prior,
                         double factor, int particles, Rng& rng);

struct RunOutcome {
  std::string directory;
  double rmse = 0.0;
  double ll = 0.0;
  Eigen::Index T_e = 0;
  double train_seconds = 0.0;
  double test_seconds = 0.0;
  Json metrics;
};

struct ExperimentResult {
  std::vector<RunOutcome> runs;
  Json metrics;  // averaged over runs when there is more than one
};

/// Runs the configured mode end to end and writes its artifacts. Errors are
/// rethrown with the failing run attached.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream& log);

}  // namespace rrgp
