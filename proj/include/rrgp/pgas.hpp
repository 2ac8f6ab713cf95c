#pragma once

// Conditional particle filter with ancestor sampling (PGAS). Slot N-1 (0-based)
// is pinned to the reference trajectory; the others use the bootstrap
// proposal N(f(x_t), Q) with systematic resampling conditioned on the
// reference's ancestor. Running without a reference gives an ordinary
// bootstrap particle filter.

#include "rrgp/common.hpp"
#include "rrgp/model.hpp"
#include "rrgp/random.hpp"

#include <cstddef>
#include <vector>

namespace rrgp {

using IndexMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ParticleSystem {
  std::vector<RowMatrix> particles;  // T entries of N x n_x
  RowMatrix log_weights;             // T x N, unnormalized
  IndexMatrix ancestors;             // (T-1) x N: parent at t of particle i at t+1

  Eigen::Index particle_count() const { return log_weights.cols(); }
  Eigen::Index length() const { return log_weights.rows(); }
  Eigen::Index reference_index() const { return particle_count() - 1; }

  /// Ancestral path ending in particle `final_index` at time T.
  RowMatrix trace(Eigen::Index final_index) const;
};

struct PgasResult {
  RowMatrix states;  // T x n_x
  /// sum_t log( mean_i w_t^i ); with a reference this is the conditional
  /// filter's estimate and is only a diagnostic.
  double log_likelihood = 0.0;
  std::size_t out_of_domain = 0;
  Eigen::Index final_index = 0;
};

/// One PGAS Markov kernel step targeting p(x_{1:T} | A, Q, theta, y_{1:T}).
/// `inputs` is T x n_u (may have zero columns). N >= 2. If `system` is given
/// the full particle system is stored there.
PgasResult pgas_kernel(const RRGPSSM& model, const RowMatrix& reference,
                       const RowMatrix& observations, const RowMatrix& inputs, int particles,
                       Rng& rng, ParticleSystem* system = nullptr);

/// Unconditional bootstrap filter; returns one ancestral path drawn with
/// probability proportional to the final weights.
PgasResult bootstrap_trajectory(const RRGPSSM& model, const RowMatrix& observations,
                                const RowMatrix& inputs, int particles, Rng& rng,
                                ParticleSystem* system = nullptr);

/// Systematic resampling of `count` indices from normalized `weights`.
std::vector<int> systematic_resample(const Vector& weights, int count, Rng& rng);

/// Systematic resampling conditioned on one output slot holding `fixed`:
/// returns the other count - 1 indices in random order. The input order is
/// randomly permuted first so the scheme is exchangeable over slots; this is
/// the resampling step of the conditional filter, where the pinned slot's
/// ancestor comes from ancestor sampling.
std::vector<int> conditional_systematic_resample(const Vector& weights, int count, int fixed,
                                                 Rng& rng);

/// Index drawn with probability proportional to exp(log_weights).
int sample_log_categorical(const Vector& log_weights, Rng& rng);

/// Max-subtracted exp-normalization; throws NumericalError if every entry is -inf.
Vector normalize_log_weights(const Vector& log_weights, double* log_sum = nullptr);

}  // namespace rrgp
