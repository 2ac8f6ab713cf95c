#include "rrgp/gibbs.hpp"

#include "rrgp/distributions.hpp"
#include "rrgp/pgas.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace rrgp {

namespace {

Vector draw_theta_from_prior(const PriorSpec& prior, const FeatureMap& features, Rng& rng) {
  // Prior draws whose precision overflows have zero density under any
  // nonzero weights; redraw those.
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vector theta(prior.theta_mean.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i)
      theta[i] = prior.theta_mean[i] + prior.theta_std[i] * rng.normal();
    if (features.log_precision(theta).array().exp().allFinite()) return theta;
  }
  throw NumericalError("could not draw an initial theta with finite prior precision");
}

[[noreturn]] void rethrow_with_iteration(int k) {
  const std::string prefix = "Gibbs iteration " + std::to_string(k) + ": ";
  try {
    throw;
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(prefix + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(prefix + e.what());
  }
}

}  // namespace

RRGPSSM ModelStructure::with(const Matrix& A, const Matrix& Q) const {
  return RRGPSSM{features, A, Q, observation, x1};
}

RRGPSSM model_from_record(const ModelStructure& structure, const ChainRecord& record) {
  RRGPSSM model = structure.with(record.A, record.Q);
  if (record.C) model.observation.C = *record.C;
  if (record.R) model.observation.R = *record.R;
  return model;
}

GibbsChain run_gibbs(const RowMatrix& observations, const RowMatrix& inputs,
                     const LearnerConfig& config, Rng& rng) {
  if (config.iterations < 1) throw std::invalid_argument("iterations K must be >= 1");
  if (config.particles < 2) throw std::invalid_argument("particle count N must be >= 2");
  if (!config.structure.features) throw std::invalid_argument("learner has no feature map");
  const FeatureMap& features = *config.structure.features;
  const Eigen::Index nx = features.state_dim();
  const Eigen::Index m = features.size();
  const Eigen::Index T = observations.rows();
  if (T < 2) throw std::invalid_argument("need at least two observations");
  config.prior.validate(nx, features.theta_size());

  Vector scales = config.mh_scales.size() > 0
                      ? config.mh_scales
                      : Vector::Constant(features.theta_size(), config.mh_scale);
  require_dim(scales.size() == features.theta_size(), "mh_scales has wrong length");

  // Initial state of the chain.
  Vector log_theta = config.theta_init ? *config.theta_init
                                       : draw_theta_from_prior(config.prior, features, rng);
  require_dim(log_theta.size() == features.theta_size(), "theta_init has wrong length");
  Matrix Q = sample_iw(config.prior.q_dof, config.prior.q_scale, rng);
  Vector V = features.precision(log_theta);
  Matrix A = sample_mn(Matrix::Zero(nx, m), Q, Matrix(V.asDiagonal()), rng);

  ObservationModel observation = config.structure.observation;
  const auto& obs_prior = config.observation_prior;
  if (obs_prior) {
    observation.R = sample_iw(obs_prior->r_dof, obs_prior->r_scale, rng);
    observation.C = sample_mn(Matrix::Zero(observation.C.rows(), observation.C.cols()),
                              observation.R, Matrix(obs_prior->precision.asDiagonal()), rng);
  }

  ModelStructure structure = config.structure;
  structure.observation = observation;
  RowMatrix x;
  if (config.initial_states) {
    x = *config.initial_states;
    require_dim(x.rows() == T && x.cols() == nx, "initial states must be T x n_x");
  } else {
    x = bootstrap_trajectory(structure.with(A, Q), observations, inputs, config.particles, rng)
            .states;
  }

  GibbsChain chain;
  chain.records.reserve(static_cast<std::size_t>(config.iterations));
  const double T_eff = static_cast<double>(T - 1);
  double scale_multiplier = 1.0;
  std::size_t window_proposals = 0;
  std::size_t window_accepted = 0;

  for (int k = 0; k < config.iterations; ++k) {
    const auto started = std::chrono::steady_clock::now();
    ChainRecord record;
    try {
      const PgasResult pg = pgas_kernel(structure.with(A, Q), x, observations, inputs,
                                        config.particles, rng);
      x = pg.states;

      const SufficientStats stats = sufficient_statistics(x, inputs, features);
      V = features.precision(log_theta);
      Q = sample_Q_posterior(stats, V, config.prior.q_dof, config.prior.q_scale, T_eff, rng);
      A = sample_A_posterior(stats, V, Q, rng);

      bool accepted = false;
      if (features.theta_size() > 0) {
        const ThetaTargetInputs in{stats, T_eff, Q, A, features, config.prior,
                                   config.theta_target};
        for (int s = 0; s < config.mh_steps; ++s) {
          const MhStep step = mh_hyperparameter_step(log_theta, in, scales * scale_multiplier, rng);
          log_theta = step.log_theta;
          accepted = accepted || step.accepted;
          ++chain.diagnostics.mh_proposals;
          ++window_proposals;
          if (step.accepted) {
            ++chain.diagnostics.mh_accepted;
            ++window_accepted;
          }
        }
      }

      if (obs_prior) {
        RowMatrix Z(T, structure.observation.regressor_dim());
        for (Eigen::Index t = 0; t < T; ++t)
          Z.row(t) = structure.observation.regressors(x.row(t).transpose()).transpose();
        const ObservationDraw draw =
            sample_observation_model(regression_statistics(observations, Z), *obs_prior, rng);
        structure.observation.C = draw.C;
        structure.observation.R = draw.R;
        record.C = draw.C;
        record.R = draw.R;
      }

      record.iteration = k;
      if (config.store_states) record.states = x;
      record.A = A;
      record.Q = Q;
      record.log_theta = log_theta;
      record.accepted = accepted;
      record.log_likelihood = pg.log_likelihood;
      chain.diagnostics.out_of_domain.push_back(pg.out_of_domain);
    } catch (...) {
      rethrow_with_iteration(k);
    }

    if (k < config.adapt_iterations && (k + 1) % 25 == 0 && window_proposals > 0) {
      const double rate =
          static_cast<double>(window_accepted) / static_cast<double>(window_proposals);
      if (rate > 0.4) scale_multiplier *= 1.5;
      if (rate < 0.2) scale_multiplier /= 1.5;
      window_proposals = window_accepted = 0;
    }

    chain.records.push_back(std::move(record));
    chain.diagnostics.seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
  }
  chain.diagnostics.final_mh_scale = config.mh_scale * scale_multiplier;
  return chain;
}

std::vector<ChainRecord> after_burn_in(const GibbsChain& chain, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0))
    throw std::invalid_argument("burn-in fraction must be in [0, 1)");
  const auto n = chain.records.size();
  const auto first = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  return {chain.records.begin() + static_cast<std::ptrdiff_t>(first), chain.records.end()};
}

}  // namespace rrgp
