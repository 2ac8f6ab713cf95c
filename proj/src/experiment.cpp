#include "rrgp/experiment.hpp"

#include "rrgp/benchmarks.hpp"
#include "rrgp/chain_io.hpp"
#include "rrgp/evaluation.hpp"
#include "rrgp/features.hpp"
#include "rrgp/pgas.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace rrgp {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kEvalDataStream = 2;
constexpr std::uint64_t kSamplerStream = 3;
constexpr std::uint64_t kPredictStream = 4;
constexpr std::uint64_t kPilotStream = 5;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool is_benchmark(ExperimentMode mode) {
  return mode == ExperimentMode::Benchmark1 || mode == ExperimentMode::Benchmark2;
}

template <typename T>
std::vector<T> broadcast(const std::vector<T>& v, std::size_t n, const char* what) {
  if (v.size() == n) return v;
  if (v.size() == 1) return std::vector<T>(n, v[0]);
  throw std::invalid_argument(std::string(what) + " needs 1 or " + std::to_string(n) + " entries");
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

PriorSpec make_prior(const ExperimentConfig& c, Eigen::Index theta_size) {
  PriorSpec p = PriorSpec::defaults(c.n_x, theta_size);
  p.q_dof = c.q_dof;
  p.q_scale = c.q_scale * Matrix::Identity(c.n_x, c.n_x);
  p.theta_mean.setConstant(c.theta_prior_mean);
  p.theta_std.setConstant(c.theta_prior_std);
  return p;
}

ObservationModel make_observation(const ExperimentConfig& c, Eigen::Index n_y) {
  ObservationModel obs;
  obs.C = c.obs_C.size() > 0 ? c.obs_C : Matrix(Matrix::Identity(n_y, c.n_x));
  obs.R = c.obs_R.size() > 0 ? c.obs_R : Matrix(Matrix::Identity(n_y, n_y));
  if (obs.C.rows() != n_y || obs.C.cols() != c.n_x)
    throw DimensionError("observation matrix C must be n_y x n_x = " + std::to_string(n_y) + " x " +
                         std::to_string(c.n_x));
  if (obs.R.rows() != n_y || obs.R.cols() != n_y)
    throw DimensionError("observation noise R must be n_y x n_y");
  return obs;
}

KernelSpec make_kernel(const ExperimentConfig& c, std::size_t dim) {
  KernelSpec k;
  k.family = kernel_family_from_string(c.kernel);
  k.variance = 1.0;
  k.lengthscales = std::vector<double>(dim, 1.0);
  k.matern_nu = c.matern_nu;
  return k;
}

struct BuiltModel {
  ModelStructure structure;
  PriorSpec prior;
  Json notes = Json::object();
};

BuiltModel build_model(const ExperimentConfig& c, const Dataset& train, Rng& pilot_rng) {
  const auto nx = static_cast<std::size_t>(c.n_x);
  BuiltModel b;
  b.structure.observation = make_observation(c, train.observations.cols());
  b.structure.x1 = GaussianInit::standard(c.n_x);
  PriorSpec base_prior = make_prior(c, 0);

  std::vector<double> L;
  if (c.half_widths.empty()) {
    const Vector w = pilot_half_widths(train.observations, train.inputs, b.structure.observation,
                                       base_prior, c.domain_factor, c.filter_particles, pilot_rng);
    L.assign(w.data(), w.data() + w.size());
    b.notes["domain"] = "pilot filter, factor " + std::to_string(c.domain_factor);
  } else {
    L = broadcast(c.half_widths, nx, "half_widths");
    b.notes["domain"] = "configured";
  }
  BasisConfig state = BasisConfig::tensor_grid(Domain(L), broadcast(c.basis, nx, "basis"),
                                               make_kernel(c, nx));

  std::optional<BasisConfig> input;
  const auto nu = static_cast<std::size_t>(train.inputs.cols());
  if (nu > 0) {
    std::vector<double> Lu;
    if (c.input_half_widths.empty()) {
      for (std::size_t k = 0; k < nu; ++k) {
        const double umax = train.inputs.col(static_cast<Eigen::Index>(k)).cwiseAbs().maxCoeff();
        Lu.push_back(umax > 0.0 ? 1.5 * umax : 1.0);
      }
    } else {
      Lu = broadcast(c.input_half_widths, nu, "input_half_widths");
    }
    const std::vector<int> mu =
        c.input_basis.empty() ? std::vector<int>(nu, 8) : broadcast(c.input_basis, nu, "input_basis");
    input = BasisConfig::tensor_grid(Domain(Lu), mu, make_kernel(c, nu));
  }
  b.structure.features = std::make_shared<HilbertFeatures>(std::move(state), std::move(input));
  b.prior = make_prior(c, b.structure.features->theta_size());
  b.notes["half_widths"] = L;
  return b;
}

LearnerConfig make_learner(const ExperimentConfig& c, const BuiltModel& b, const Dataset& train) {
  LearnerConfig lc;
  lc.structure = b.structure;
  lc.prior = b.prior;
  lc.iterations = c.iterations;
  lc.particles = c.particles;
  lc.mh_scale = c.mh_scale;
  lc.mh_steps = c.mh_steps;
  lc.adapt_iterations = c.adapt_iterations;
  lc.theta_target = theta_target_from_string(c.theta_target);
  lc.store_states = false;
  if (!c.theta_init.empty()) {
    const auto n = static_cast<std::size_t>(b.structure.features->theta_size());
    const std::vector<double> t = broadcast(c.theta_init, n, "theta_init");
    Vector log_theta(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (!(t[i] > 0.0)) throw std::invalid_argument("theta_init entries must be positive");
      log_theta[static_cast<Eigen::Index>(i)] = std::log(t[i]);
    }
    lc.theta_init = log_theta;
  }
  if (c.init_states == "observations") {
    const Matrix& C = b.structure.observation.C;
    const Matrix pinv = C.completeOrthogonalDecomposition().pseudoInverse();
    lc.initial_states = RowMatrix(train.observations * pinv.transpose());
  }
  if (c.learn_observation) {
    const Eigen::Index ny = b.structure.observation.obs_dim();
    ObservationPrior op;
    op.precision = Vector::Constant(b.structure.observation.regressor_dim(), c.c_precision);
    op.r_dof = c.r_dof;
    op.r_scale = c.r_scale * Matrix::Identity(ny, ny);
    lc.observation_prior = op;
  }
  return lc;
}

struct Evaluation {
  PredictiveSummary pred;
  RowMatrix target;
  long first_time = 1;
  std::string protocol;
  std::string target_name;
};

Evaluation evaluate(const ExperimentConfig& c, std::span<const ChainRecord> records,
                    const ModelStructure& structure, const Dataset& data, bool forecast, Rng& rng) {
  Evaluation e;
  std::string protocol = c.protocol;
  if (forecast) protocol = "filter";
  if (protocol == "auto") protocol = data.has_states() ? "one_step" : "free_run";
  const Eigen::Index T = data.length();

  if (protocol == "one_step") {
    if (!data.has_states())
      throw InputError("protocol one_step needs true states (x* columns) in the evaluation data");
    e.pred = posterior_predictive(records, structure, data.states, data.inputs,
                                  PredictionMode::OneStep, PredictionTarget::State,
                                  c.predictive_samples, rng);
    e.target = data.states.bottomRows(T - 1);
    e.first_time = 2;
    e.target_name = "state";
    e.protocol = "one-step-ahead prediction of x_{t+1} given the true x_t";
  } else if (protocol == "free_run") {
    const int S = c.predictive_samples > 0 ? c.predictive_samples : 10;
    const RowMatrix start = data.has_states() ? RowMatrix(data.states.topRows(1)) : RowMatrix();
    e.pred = posterior_predictive(records, structure, start, data.inputs, PredictionMode::FreeRun,
                                  PredictionTarget::Observation, S, rng, T);
    e.target = data.observations;
    e.target_name = "observation";
    e.protocol = "free-run simulation of y_{1:T} with " + std::to_string(S) +
                 " draws per record";
  } else if (protocol == "filter") {
    if (T <= c.horizon) throw InputError("evaluation series is shorter than the forecast horizon");
    e.pred = forecast_rolling(records, structure, data.observations, data.inputs, c.horizon,
                              c.filter_particles, rng);
    e.target = data.observations.bottomRows(T - c.horizon);
    e.first_time = c.horizon + 1;
    e.target_name = "observation";
    e.protocol = std::to_string(c.horizon) + "-step-ahead particle-filter forecast of y_{t+" +
                 std::to_string(c.horizon) + "} given y_{1:t}";
  } else {
    throw std::invalid_argument("unknown protocol '" + c.protocol + "'");
  }
  if (data.timestamps) e.first_time = static_cast<long>((*data.timestamps)[e.first_time - 1]);
  return e;
}

Json metrics_json(const ExperimentConfig& c, const Evaluation& e, std::uint64_t seed) {
  Json m;
  m["rmse"] = rmse(e.pred, e.target);
  m["ll"] = mean_loglik(e.pred, e.target);
  m["T_e"] = e.target.rows();
  m["protocol"] = e.protocol;
  m["burn_in"] = c.burn_in;
  m["seed"] = seed;
  m["target"] = e.target_name;
  return m;
}

Json manifest_json(const ExperimentConfig& c, std::uint64_t run_seed, const Json& notes) {
  Json m;
  m["tool"] = "rrgpssm";
  m["version"] = kToolVersion;
  m["mode"] = to_string(c.mode);
  m["seed"] = run_seed;
  m["config"] = config_to_json(c);
  m["notes"] = notes;
  return m;
}

// Posterior of f on a grid for 1-D autonomous models: mean, std and the
// central 95% band over retained records.
bool write_f_posterior(const fs::path& path, std::span<const ChainRecord> records,
                       const ModelStructure& structure, double (*truth)(double),
                       const std::vector<std::pair<std::string, double>>& probes, Json& out) {
  const auto* hf = dynamic_cast<const HilbertFeatures*>(structure.features.get());
  if (!hf || hf->state_dim() != 1 || hf->input_dim() != 0 || records.empty()) return false;
  const double L = hf->state_basis().domain().half_widths()[0];
  const int points = 201;
  const auto K = static_cast<Eigen::Index>(records.size());
  Vector z(hf->size());
  const auto draws_at = [&](double x) {
    Vector f(K);
    hf->evaluate(Vector::Constant(1, x), Vector(), z);
    for (Eigen::Index k = 0; k < K; ++k) f[k] = records[static_cast<std::size_t>(k)].A.row(0).dot(z);
    return f;
  };
  const auto sd = [](const Vector& f) {
    return std::sqrt((f.array() - f.mean()).square().sum() / static_cast<double>(f.size()));
  };

  std::ofstream os = open_out(path);
  os << "x,mean,std,lo95,hi95" << (truth ? ",true_f" : "") << '\n';
  for (int i = 0; i < points; ++i) {
    const double x = -L + 2.0 * L * i / (points - 1);
    Vector f = draws_at(x);
    std::sort(f.data(), f.data() + f.size());
    const auto q = [&](double p) {
      return f[static_cast<Eigen::Index>(std::floor(p * static_cast<double>(K - 1)))];
    };
    os << x << ',' << f.mean() << ',' << sd(f) << ',' << q(0.025) << ',' << q(0.975);
    if (truth) os << ',' << truth(x);
    os << '\n';
  }
  for (const auto& [name, x] : probes) out[name] = sd(draws_at(x));
  return true;
}

void write_weights(const fs::path& path, std::span<const ChainRecord> records) {
  std::ofstream os = open_out(path);
  os << "iter,j,weight\n";
  for (const ChainRecord& r : records)
    for (Eigen::Index j = 0; j < r.A.cols(); ++j) os << r.iteration << ',' << j + 1 << ',' << r.A(0, j) << '\n';
}

struct RunContext {
  const ExperimentConfig& config;
  int index;
  std::uint64_t seed;
  fs::path dir;
  std::ostream& log;
  std::mutex& log_mutex;

  void say(const std::string& msg) const {
    std::lock_guard<std::mutex> lock(log_mutex);
    log << (config.chains > 1 ? "[run " + std::to_string(index) + "] " : std::string()) << msg
        << std::endl;
  }
};

RunOutcome run_one(const RunContext& ctx) {
  const ExperimentConfig& c = ctx.config;
  fs::create_directories(ctx.dir);
  RunOutcome out;
  out.directory = ctx.dir.string();
  Json notes = Json::object();

  // Data.
  Dataset train, eval_data;
  double (*truth)(double) = nullptr;
  if (is_benchmark(c.mode)) {
    const bool tanh_system = c.mode == ExperimentMode::Benchmark1;
    const auto gen = tanh_system ? gen_benchmark1 : gen_benchmark2;
    const BenchmarkNoise noise = tanh_system ? kTanhNoise : kKinkNoise;
    truth = tanh_system ? tanh_transition : kink_transition;
    train = gen(c.train_length, derive_seed(ctx.seed, kDataStream), noise);
    eval_data = gen(c.eval_length, derive_seed(ctx.seed, kEvalDataStream), noise);
    std::ofstream tos = open_out(ctx.dir / "train.csv");
    write_csv(tos, train);
    notes["system"] = tanh_system ? "x' = tanh(2x) + w, y = x + e, var(w) = var(e) = 0.1"
                                  : "kink: x' = x + 1 + w (x < 4), -4x + 21 + w (x >= 4); "
                                    "y = x + e; var(w) = var(e) = 1";
  } else if (c.mode == ExperimentMode::Eval) {
    eval_data = load_csv(c.eval_path.empty() ? c.data_path : c.eval_path);
    notes["evaluation_data"] = c.eval_path.empty() ? c.data_path : c.eval_path;
  } else {
    if (!c.data_path.empty()) train = load_csv(c.data_path);
    eval_data = c.eval_path.empty() ? train : load_csv(c.eval_path);
    notes["evaluation_data"] = c.eval_path.empty() ? "training data (in-sample)" : c.eval_path;
  }

  // Chain: sampled or loaded.
  ModelStructure structure;
  std::vector<ChainRecord> records;
  const bool need_sampling =
      c.mode != ExperimentMode::Eval && !(c.mode == ExperimentMode::Forecast && !c.chain_path.empty());
  if (need_sampling) {
    Rng pilot_rng(derive_seed(ctx.seed, kPilotStream));
    const BuiltModel built = build_model(c, train, pilot_rng);
    notes["model"] = built.notes;
    structure = built.structure;
    const LearnerConfig lc = make_learner(c, built, train);
    Rng rng(derive_seed(ctx.seed, kSamplerStream));
    ctx.say("sampling K=" + std::to_string(c.iterations) + " N=" + std::to_string(c.particles) +
            " m=" + std::to_string(structure.features->size()) + " T=" + std::to_string(train.length()));
    const auto started = Clock::now();
    GibbsChain chain = run_gibbs(train.observations, train.inputs, lc, rng);
    out.train_seconds = seconds_since(started);
    {
      std::ofstream cos = open_out(ctx.dir / "chain.ndjson");
      write_chain(cos, structure, chain);
    }
    std::size_t ood = 0;
    for (auto n : chain.diagnostics.out_of_domain) ood += n;
    notes["mh_acceptance"] = chain.diagnostics.acceptance_rate();
    notes["out_of_domain_evaluations"] = ood;
    records = after_burn_in(chain, c.burn_in);
  } else {
    const ChainFile file = read_chain_file(c.chain_path);
    structure = file.structure;
    if (file.records.empty()) throw InputError("chain file '" + c.chain_path + "' has no records");
    const auto first = static_cast<std::size_t>(
        std::floor(c.burn_in * static_cast<double>(file.records.size())));
    records.assign(file.records.begin() + static_cast<std::ptrdiff_t>(first), file.records.end());
    notes["chain"] = c.chain_path;
  }

  // Evaluation.
  Rng prng(derive_seed(ctx.seed, kPredictStream));
  const auto started = Clock::now();
  const Evaluation e =
      evaluate(c, records, structure, eval_data, c.mode == ExperimentMode::Forecast, prng);
  out.test_seconds = seconds_since(started);
  out.metrics = metrics_json(c, e, ctx.seed);
  out.rmse = out.metrics["rmse"].get<double>();
  out.ll = out.metrics["ll"].get<double>();
  out.T_e = e.target.rows();
  out.metrics["records"] = records.size();
  if (need_sampling) out.metrics["train_seconds"] = out.train_seconds;
  out.metrics["test_seconds"] = out.test_seconds;
  if (notes.contains("mh_acceptance")) out.metrics["mh_acceptance"] = notes["mh_acceptance"];

  if (is_benchmark(c.mode)) {
    Json probe = Json::object();
    const std::vector<std::pair<std::string, double>> probes = {
        {"f_std_at_minus3", -3.0}, {"f_std_at_0", 0.0}, {"f_std_at_plus3", 3.0}};
    if (write_f_posterior(ctx.dir / "f_posterior.csv", records, structure, truth, probes, probe)) {
      for (auto& [k, v] : probe.items()) out.metrics[k] = v;
      if (c.mode == ExperimentMode::Benchmark1) {
        const double s0 = probe["f_std_at_0"].get<double>();
        out.metrics["f_std_ratio_minus3"] = probe["f_std_at_minus3"].get<double>() / s0;
        out.metrics["f_std_ratio_plus3"] = probe["f_std_at_plus3"].get<double>() / s0;
      }
    }
    if (c.mode == ExperimentMode::Benchmark1) write_weights(ctx.dir / "weights.csv", records);
  }

  {
    std::ofstream pos = open_out(ctx.dir / "predictive.csv");
    write_predictive_csv(pos, e.pred, e.first_time);
  }
  write_json(ctx.dir / "metrics.json", out.metrics);
  notes["protocol"] = e.protocol;
  write_json(ctx.dir / "manifest.json", manifest_json(c, ctx.seed, notes));
  ctx.say("rmse " + std::to_string(out.rmse) + "  ll " + std::to_string(out.ll));
  return out;
}

void write_summary(const fs::path& path, const std::vector<RunOutcome>& runs, bool has_mean) {
  std::ofstream os = open_out(path);
  os << "run,method,rmse,ll,train_time_min,test_time_s\n";
  double r = 0, l = 0, tr = 0, te = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    os << i << ",reduced-rank GP-SSM," << runs[i].rmse << ',' << runs[i].ll << ','
       << runs[i].train_seconds / 60.0 << ',' << runs[i].test_seconds << '\n';
    r += runs[i].rmse;
    l += runs[i].ll;
    tr += runs[i].train_seconds;
    te += runs[i].test_seconds;
  }
  if (has_mean) {
    const double n = static_cast<double>(runs.size());
    os << "mean,reduced-rank GP-SSM," << r / n << ',' << l / n << ',' << tr / n / 60.0 << ','
       << te / n << '\n';
  }
}

}  // namespace

std::string to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::Learn: return "learn";
    case ExperimentMode::Forecast: return "forecast";
    case ExperimentMode::Eval: return "eval";
    case ExperimentMode::Benchmark1: return "benchmark1";
    case ExperimentMode::Benchmark2: return "benchmark2";
  }
  return "learn";
}

ExperimentMode experiment_mode_from_string(const std::string& name) {
  if (name == "learn") return ExperimentMode::Learn;
  if (name == "forecast") return ExperimentMode::Forecast;
  if (name == "eval") return ExperimentMode::Eval;
  if (name == "benchmark1" || name == "bench1") return ExperimentMode::Benchmark1;
  if (name == "benchmark2" || name == "bench2") return ExperimentMode::Benchmark2;
  throw std::invalid_argument("unknown mode '" + name + "'");
}

void ExperimentConfig::validate() const {
  const auto positive = [](long v, const char* what) {
    if (v < 1) throw std::invalid_argument(std::string(what) + " must be >= 1");
  };
  positive(n_x, "n_x");
  positive(iterations, "iterations");
  positive(particles, "particles");
  positive(mh_steps, "mh_steps");
  positive(horizon, "horizon");
  positive(filter_particles, "filter_particles");
  positive(chains, "chains");
  positive(threads, "threads");
  positive(train_length, "train_length");
  positive(eval_length, "eval_length");
  if (particles < 2) throw std::invalid_argument("particles must be >= 2");
  if (basis.empty()) throw std::invalid_argument("basis needs at least one entry");
  for (int b : basis) positive(b, "basis");
  for (int b : input_basis) positive(b, "input_basis");
  for (double L : half_widths)
    if (!(L > 0.0)) throw std::invalid_argument("half_widths must be positive");
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw std::invalid_argument("burn_in must be in [0, 1)");
  if (!(domain_factor > 0.0)) throw std::invalid_argument("domain_factor must be positive");
  if (predictive_samples < 0) throw std::invalid_argument("predictive_samples must be >= 0");
  if (init_states != "bootstrap" && init_states != "observations")
    throw std::invalid_argument("init_states must be 'bootstrap' or 'observations'");
  kernel_family_from_string(kernel);
  theta_target_from_string(theta_target);
  if (protocol != "auto" && protocol != "one_step" && protocol != "free_run" && protocol != "filter")
    throw std::invalid_argument("unknown protocol '" + protocol + "'");

  switch (mode) {
    case ExperimentMode::Learn:
      if (data_path.empty()) throw std::invalid_argument("learn mode needs a data path");
      break;
    case ExperimentMode::Forecast:
      if (data_path.empty() && (chain_path.empty() || eval_path.empty()))
        throw std::invalid_argument("forecast mode needs a data path");
      break;
    case ExperimentMode::Eval:
      if (chain_path.empty()) throw std::invalid_argument("eval mode needs a chain file");
      if (data_path.empty() && eval_path.empty())
        throw std::invalid_argument("eval mode needs a data path");
      break;
    default: break;
  }
  if (output_dir.empty()) throw std::invalid_argument("output directory must be nonempty");
}

ExperimentConfig default_config(ExperimentMode mode) {
  ExperimentConfig c;
  c.mode = mode;
  if (mode == ExperimentMode::Benchmark1) {
    c.kernel = "se";
    c.half_widths = {4.0};
    c.basis = {20};
    c.init_states = "observations";
    c.obs_R = Matrix::Constant(1, 1, kTanhNoise.obs_var);
    c.eval_length = 1000;
    c.output_dir = "runs/bench1";
  } else if (mode == ExperimentMode::Benchmark2) {
    c.kernel = "matern";
    c.matern_nu = 1.5;
    c.half_widths = {12.0};
    c.init_states = "observations";
    c.obs_R = Matrix::Constant(1, 1, kKinkNoise.obs_var);
    c.basis = {20};
    c.eval_length = 100000;
    c.chains = 10;
    c.output_dir = "runs/bench2";
  }
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["mode"] = to_string(c.mode);
  j["data"] = c.data_path;
  j["eval_data"] = c.eval_path;
  j["chain"] = c.chain_path;
  j["output"] = c.output_dir;
  j["n_x"] = c.n_x;
  j["basis"] = c.basis;
  j["half_widths"] = c.half_widths;
  j["domain_factor"] = c.domain_factor;
  j["kernel"] = c.kernel;
  j["matern_nu"] = c.matern_nu;
  j["input_basis"] = c.input_basis;
  j["input_half_widths"] = c.input_half_widths;
  j["obs_C"] = c.obs_C.size() ? matrix_to_json(c.obs_C) : Json::array();
  j["obs_R"] = c.obs_R.size() ? matrix_to_json(c.obs_R) : Json::array();
  j["learn_observation"] = c.learn_observation;
  j["r_dof"] = c.r_dof;
  j["r_scale"] = c.r_scale;
  j["c_precision"] = c.c_precision;
  j["q_dof"] = c.q_dof;
  j["q_scale"] = c.q_scale;
  j["theta_prior_mean"] = c.theta_prior_mean;
  j["theta_prior_std"] = c.theta_prior_std;
  j["theta_init"] = c.theta_init;
  j["init_states"] = c.init_states;
  j["iterations"] = c.iterations;
  j["particles"] = c.particles;
  j["burn_in"] = c.burn_in;
  j["mh_scale"] = c.mh_scale;
  j["mh_steps"] = c.mh_steps;
  j["adapt_iterations"] = c.adapt_iterations;
  j["theta_target"] = c.theta_target;
  j["protocol"] = c.protocol;
  j["predictive_samples"] = c.predictive_samples;
  j["horizon"] = c.horizon;
  j["filter_particles"] = c.filter_particles;
  j["train_length"] = c.train_length;
  j["eval_length"] = c.eval_length;
  j["seed"] = c.seed;
  j["chains"] = c.chains;
  j["threads"] = c.threads;
  return j;
}

ExperimentConfig config_from_json(const Json& in, ExperimentConfig c) {
  const Json& j = in.contains("config") && in.at("config").is_object() ? in.at("config") : in;
  if (!j.is_object()) throw InputError("configuration must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "mode") c.mode = experiment_mode_from_string(v.get<std::string>());
      else if (key == "data") c.data_path = v.get<std::string>();
      else if (key == "eval_data") c.eval_path = v.get<std::string>();
      else if (key == "chain") c.chain_path = v.get<std::string>();
      else if (key == "output") c.output_dir = v.get<std::string>();
      else if (key == "n_x") c.n_x = v.get<int>();
      else if (key == "basis") c.basis = v.get<std::vector<int>>();
      else if (key == "half_widths") c.half_widths = v.get<std::vector<double>>();
      else if (key == "domain_factor") c.domain_factor = v.get<double>();
      else if (key == "kernel") c.kernel = v.get<std::string>();
      else if (key == "matern_nu") c.matern_nu = v.get<double>();
      else if (key == "input_basis") c.input_basis = v.get<std::vector<int>>();
      else if (key == "input_half_widths") c.input_half_widths = v.get<std::vector<double>>();
      else if (key == "obs_C") c.obs_C = v.empty() ? Matrix() : matrix_from_json(v);
      else if (key == "obs_R") c.obs_R = v.empty() ? Matrix() : matrix_from_json(v);
      else if (key == "learn_observation") c.learn_observation = v.get<bool>();
      else if (key == "r_dof") c.r_dof = v.get<double>();
      else if (key == "r_scale") c.r_scale = v.get<double>();
      else if (key == "c_precision") c.c_precision = v.get<double>();
      else if (key == "q_dof") c.q_dof = v.get<double>();
      else if (key == "q_scale") c.q_scale = v.get<double>();
      else if (key == "theta_prior_mean") c.theta_prior_mean = v.get<double>();
      else if (key == "theta_prior_std") c.theta_prior_std = v.get<double>();
      else if (key == "theta_init") c.theta_init = v.get<std::vector<double>>();
      else if (key == "init_states") c.init_states = v.get<std::string>();
      else if (key == "iterations") c.iterations = v.get<int>();
      else if (key == "particles") c.particles = v.get<int>();
      else if (key == "burn_in") c.burn_in = v.get<double>();
      else if (key == "mh_scale") c.mh_scale = v.get<double>();
      else if (key == "mh_steps") c.mh_steps = v.get<int>();
      else if (key == "adapt_iterations") c.adapt_iterations = v.get<int>();
      else if (key == "theta_target") c.theta_target = v.get<std::string>();
      else if (key == "protocol") c.protocol = v.get<std::string>();
      else if (key == "predictive_samples") c.predictive_samples = v.get<int>();
      else if (key == "horizon") c.horizon = v.get<int>();
      else if (key == "filter_particles") c.filter_particles = v.get<int>();
      else if (key == "train_length") c.train_length = v.get<long>();
      else if (key == "eval_length") c.eval_length = v.get<long>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "chains") c.chains = v.get<int>();
      else if (key == "threads") c.threads = v.get<int>();
      else throw InputError("unknown configuration key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid configuration: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config file '" + path + "': " + e.what());
  }
  return config_from_json(j, base);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream).
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Vector pilot_half_widths(const RowMatrix& observations, const RowMatrix& inputs,
                         const ObservationModel& observation, const PriorSpec& prior,
                         double factor, int particles, Rng& rng) {
  const Eigen::Index nx = observation.C.cols();
  const double dof_excess = prior.q_dof - static_cast<double>(nx) - 1.0;
  const Matrix Q = dof_excess > 0.0 ? Matrix(prior.q_scale / dof_excess) : prior.q_scale;
  RRGPSSM pilot{std::make_shared<LinearFeatures>(nx, Vector::Ones(nx)), Matrix::Zero(nx, nx), Q,
                observation, GaussianInit::standard(nx)};
  ParticleSystem ps;
  bootstrap_trajectory(pilot, observations, inputs, std::max(particles, 2), rng, &ps);
  Vector bound = Vector::Zero(nx);
  for (Eigen::Index t = 0; t < ps.length(); ++t) {
    const Vector w = normalize_log_weights(ps.log_weights.row(t).transpose());
    const RowMatrix& X = ps.particles[static_cast<std::size_t>(t)];
    const Vector mean = X.transpose() * w;
    for (Eigen::Index k = 0; k < nx; ++k) {
      const double var = w.dot((X.col(k).array() - mean[k]).square().matrix());
      bound[k] = std::max(bound[k], std::abs(mean[k]) + 3.0 * std::sqrt(var));
    }
  }
  return factor * bound;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const fs::path root(config.output_dir);
  fs::create_directories(root);
  std::mutex log_mutex;

  const int R = config.chains;
  std::vector<RunOutcome> runs(static_cast<std::size_t>(R));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(R));
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int r = next++; r < R; r = next++) {
      const RunContext ctx{config,
                           r,
                           config.seed + static_cast<std::uint64_t>(r),
                           R > 1 ? root / ("run_" + std::to_string(r)) : root,
                           log,
                           log_mutex};
      try {
        runs[static_cast<std::size_t>(r)] = run_one(ctx);
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    }
  };
  const int workers = std::min(config.threads, R);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (int r = 0; r < R; ++r) {
    if (!errors[static_cast<std::size_t>(r)]) continue;
    try {
      std::rethrow_exception(errors[static_cast<std::size_t>(r)]);
    } catch (const std::exception& e) {
      throw std::runtime_error((R > 1 ? "run " + std::to_string(r) + ": " : std::string()) +
                               e.what());
    }
  }

  ExperimentResult result;
  result.runs = runs;
  if (R == 1) {
    result.metrics = runs[0].metrics;
  } else {
    double rm = 0, lm = 0, r2 = 0, l2 = 0;
    for (const auto& o : runs) {
      rm += o.rmse;
      lm += o.ll;
      r2 += o.rmse * o.rmse;
      l2 += o.ll * o.ll;
    }
    const double n = R;
    Json m;
    m["rmse"] = rm / n;
    m["ll"] = lm / n;
    m["T_e"] = runs[0].T_e;
    m["protocol"] = runs[0].metrics["protocol"];
    m["burn_in"] = config.burn_in;
    m["seed"] = config.seed;
    m["runs"] = R;
    m["rmse_sd"] = std::sqrt(std::max(0.0, (r2 - rm * rm / n) / (n - 1)));
    m["ll_sd"] = std::sqrt(std::max(0.0, (l2 - lm * lm / n) / (n - 1)));
    Json per = Json::array();
    for (const auto& o : runs) per.push_back(o.metrics);
    m["per_run"] = per;
    result.metrics = m;
    write_json(root / "metrics.json", m);
    Json manifest = manifest_json(config, config.seed, Json::object());
    manifest["runs"] = Json::array();
    for (int r = 0; r < R; ++r)
      manifest["runs"].push_back({{"dir", runs[static_cast<std::size_t>(r)].directory},
                                  {"seed", config.seed + static_cast<std::uint64_t>(r)}});
    write_json(root / "manifest.json", manifest);
  }
  if (is_benchmark(config.mode)) write_summary(root / "summary.csv", runs, R > 1);
  return result;
}

}  // namespace rrgp
