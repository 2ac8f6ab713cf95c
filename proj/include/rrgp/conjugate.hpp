#pragma once

// Conjugate matrix-normal / inverse-Wishart updates for zeta_t = A z_t + noise.
// With prior Q ~ IW(l, Lambda), A | Q ~ MN(0, Q, V) the conditionals are
//   Q | . ~ IW(l + T_eff, Lambda + Phi - Psi (Sigma + V)^{-1} Psi^T)
//   A | Q ~ MN(Psi (Sigma + V)^{-1}, Q, Sigma + V)       (left precision)
// where Phi = sum zeta zeta^T, Psi = sum zeta z^T, Sigma = sum z z^T.

#include "rrgp/common.hpp"
#include "rrgp/features.hpp"
#include "rrgp/random.hpp"

namespace rrgp {

struct SufficientStats {
  Matrix Phi;    // n x n
  Matrix Psi;    // n x m
  Matrix Sigma;  // m x m
  double count = 0.0;  // number of (zeta, z) pairs

  static SufficientStats zeros(Eigen::Index n, Eigen::Index m);
  SufficientStats& operator+=(const SufficientStats& other);
};

/// Statistics of targets zeta (rows) against regressors z (rows).
SufficientStats regression_statistics(const RowMatrix& targets, const RowMatrix& regressors);

/// Transition statistics of a trajectory: zeta_t = x_{t+1}, z_t = Phi(x_t, u_t)
/// for t = 1..T-1. Requires T >= 2.
SufficientStats sufficient_statistics(const RowMatrix& states, const RowMatrix& inputs,
                                      const FeatureMap& features);

struct MniwPosterior {
  Matrix mean;       // Psi (Sigma + V)^{-1}
  Matrix precision;  // Sigma + V
  Matrix scale;      // Lambda + Phi - Psi (Sigma + V)^{-1} Psi^T
  double dof = 0.0;
};

/// `V` is the diagonal of the prior left precision. Throws NumericalError if
/// the scale increment is indefinite beyond 1e-8 * ||Phi||.
MniwPosterior mniw_posterior(const SufficientStats& stats, const Vector& V, double prior_dof,
                             const Matrix& prior_scale, double T_eff);

Matrix sample_Q_posterior(const SufficientStats& stats, const Vector& V, double prior_dof,
                          const Matrix& prior_scale, double T_eff, Rng& rng);

Matrix sample_A_posterior(const SufficientStats& stats, const Vector& V, const Matrix& Q,
                          Rng& rng);

/// MNIW prior for an unknown linear observation map y = C z + e, e ~ N(0, R).
struct ObservationPrior {
  Vector precision;  // diagonal left precision of C's columns
  double r_dof = 10.0;
  Matrix r_scale;
};

struct ObservationDraw {
  Matrix C;
  Matrix R;
};

/// Draws (R, C) from their conjugate conditional given statistics over
/// (z_t, y_t), t = 1..T.
ObservationDraw sample_observation_model(const SufficientStats& stats,
                                         const ObservationPrior& prior, Rng& rng);

}  // namespace rrgp
