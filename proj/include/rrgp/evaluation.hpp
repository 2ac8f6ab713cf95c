#pragma once

// Posterior predictive summaries and the RMSE / mean log-likelihood metrics.
// Predictions are pooled over chain records: the pooled mean is the average
// of per-record means and the pooled variance follows the law of total
// variance (mean within-record variance + variance of record means).

#include "rrgp/common.hpp"
#include "rrgp/gibbs.hpp"
#include "rrgp/random.hpp"

#include <iosfwd>
#include <span>
#include <string>

namespace rrgp {

struct PredictiveSummary {
  Matrix mean;      // T_e x n
  Matrix variance;  // T_e x n, marginal variances
  std::size_t samples = 0;  // predictive draws (or analytic records) pooled per time

  Eigen::Index length() const { return mean.rows(); }
};

enum class PredictionMode { OneStep, FreeRun };
/// What is predicted: the next latent state or the observation.
enum class PredictionTarget { State, Observation };

std::string to_string(PredictionMode mode);
std::string to_string(PredictionTarget target);

/// Per-record predictions pooled into one summary.
///
/// OneStep: entry t predicts time t+1 given the true states(t) (and inputs(t));
/// the result has T_e - 1 rows. With samples_per_record == 0 the Gaussian
/// moments are used in closed form (requires a linear observation map for the
/// Observation target).
///
/// FreeRun: closed-loop simulation over T_e steps starting at states(0) when
/// `states` is non-empty, otherwise from the initial-state distribution.
/// Requires samples_per_record >= 1. `steps` gives T_e when states is empty.
PredictiveSummary posterior_predictive(std::span<const ChainRecord> records,
                                       const ModelStructure& structure, const RowMatrix& states,
                                       const RowMatrix& inputs, PredictionMode mode,
                                       PredictionTarget target, int samples_per_record, Rng& rng,
                                       Eigen::Index steps = 0);

double rmse(const PredictiveSummary& pred, const RowMatrix& y_eval);

/// Variances are floored at kVarianceFloor.
double mean_loglik(const PredictiveSummary& pred, const RowMatrix& y_eval);

inline constexpr double kVarianceFloor = 1e-12;

/// Filters y_history with a bootstrap particle filter under every record and
/// propagates the particles k steps ahead. Row h-1 of the result is the
/// predictive for observation T+h.
PredictiveSummary forecast_k_step(std::span<const ChainRecord> records,
                                  const ModelStructure& structure, const RowMatrix& y_history,
                                  const RowMatrix& inputs, int k, int filter_particles, Rng& rng);

/// Rolling forecast: row t is the prediction of y_{t+k} given y_{1..t}, for
/// t = 1..T-k. Inputs, if any, must cover all T steps.
PredictiveSummary forecast_rolling(std::span<const ChainRecord> records,
                                   const ModelStructure& structure, const RowMatrix& y,
                                   const RowMatrix& inputs, int k, int filter_particles,
                                   Rng& rng);

/// CSV with header t,mean,var,lo95,hi95 (columns suffixed _j when n > 1).
/// `first_time` labels row 0.
void write_predictive_csv(std::ostream& os, const PredictiveSummary& pred, long first_time = 1);

}  // namespace rrgp
