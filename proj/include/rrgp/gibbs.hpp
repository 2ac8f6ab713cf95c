#pragma once

// Blocked Gibbs learner: each sweep draws
//   x_{1:T} | A, Q, theta   (PGAS kernel)
//   Q       | x, theta      (inverse Wishart)
//   A       | x, Q, theta   (matrix normal)
//   theta   | x, Q, A       (Metropolis-within-Gibbs)
// and optionally (C, R) | x, y when the observation map is learned.

#include "rrgp/common.hpp"
#include "rrgp/conjugate.hpp"
#include "rrgp/hyperparameters.hpp"
#include "rrgp/model.hpp"
#include "rrgp/random.hpp"

#include <optional>
#include <vector>

namespace rrgp {

struct ModelStructure {
  FeatureMapPtr features;
  ObservationModel observation;  // fixed C, R (initial values if learned)
  GaussianInit x1;

  RRGPSSM with(const Matrix& A, const Matrix& Q) const;
};

struct LearnerConfig {
  ModelStructure structure;
  PriorSpec prior;
  int iterations = 200;  // K
  int particles = 20;    // N

  /// log theta at the start of the chain; drawn from its prior when empty.
  std::optional<Vector> theta_init;
  /// Per-component random-walk std on log theta; 0 keeps a component fixed.
  /// Empty means mh_scale for every component.
  Vector mh_scales;
  double mh_scale = 0.1;
  int mh_steps = 1;
  /// During the first `adapt_iterations` sweeps the proposal scale is
  /// multiplied up or down every 25 sweeps towards ~30% acceptance.
  int adapt_iterations = 0;
  ThetaTarget theta_target = ThetaTarget::Conditional;

  std::optional<ObservationPrior> observation_prior;  // learn (C, R) when set

  /// Initial trajectory (T x n_x); one bootstrap filter pass when empty.
  std::optional<RowMatrix> initial_states;

  bool store_states = true;
};

struct ChainRecord {
  int iteration = 0;
  RowMatrix states;  // empty when not stored
  Matrix A;
  Matrix Q;
  Vector log_theta;
  std::optional<Matrix> C;
  std::optional<Matrix> R;
  bool accepted = false;
  double log_likelihood = 0.0;
};

struct ChainDiagnostics {
  std::vector<double> seconds;  // per sweep
  std::vector<std::size_t> out_of_domain;
  std::size_t mh_proposals = 0;
  std::size_t mh_accepted = 0;
  double final_mh_scale = 0.0;

  double acceptance_rate() const {
    return mh_proposals ? static_cast<double>(mh_accepted) / static_cast<double>(mh_proposals) : 0.0;
  }
};

struct GibbsChain {
  std::vector<ChainRecord> records;
  ChainDiagnostics diagnostics;
};

/// Model implied by one chain record.
RRGPSSM model_from_record(const ModelStructure& structure, const ChainRecord& record);

/// Runs K sweeps on observations (T x n_y) and inputs (T x n_u or empty).
/// Errors from a sweep are rethrown with the iteration index attached.
GibbsChain run_gibbs(const RowMatrix& observations, const RowMatrix& inputs,
                     const LearnerConfig& config, Rng& rng);

/// Records [first, end).
std::vector<ChainRecord> after_burn_in(const GibbsChain& chain, double fraction);

}  // namespace rrgp
