#pragma once

// The reduced-rank GP state space model
//
//   x_{t+1} = A Phi(x_t, u_t) + w_t,   w_t ~ N(0, Q)
//   y_t     = g(x_t) + e_t,            e_t ~ N(0, R)
//
// with g either linear (C x) or linear in a second feature map (C Phi_g(x)).
// When the feature map carries an input basis, the columns of A belonging to
// it are the weights A_u of the additive input term.

#include "rrgp/common.hpp"
#include "rrgp/features.hpp"
#include "rrgp/random.hpp"

namespace rrgp {

struct GaussianInit {
  Vector mean;
  Matrix cov;

  static GaussianInit standard(Eigen::Index n) {
    return {Vector::Zero(n), Matrix::Identity(n, n)};
  }
};

struct ObservationModel {
  Matrix C;
  Matrix R;
  /// When null, g(x) = C x; otherwise g(x) = C Phi_g(x).
  FeatureMapPtr features;

  Eigen::Index obs_dim() const { return C.rows(); }
  Vector mean(const Eigen::Ref<const Vector>& x) const;
  Eigen::Index regressor_dim() const { return C.cols(); }
  /// z used for the conjugate update of (C, R).
  Vector regressors(const Eigen::Ref<const Vector>& x) const;
};

struct RRGPSSM {
  FeatureMapPtr features;
  Matrix A;
  Matrix Q;
  ObservationModel observation;
  GaussianInit x1;

  Eigen::Index state_dim() const { return A.rows(); }
  /// Checks shapes and that Q, R and the initial covariance factorize (or are
  /// exactly zero).
  void validate() const;
};

struct PriorSpec {
  double q_dof = 10.0;  // l_Q
  Matrix q_scale;       // Lambda_Q
  /// Independent normal priors on log theta.
  Vector theta_mean;
  Vector theta_std;

  static PriorSpec defaults(Eigen::Index state_dim, Eigen::Index theta_size);
  void validate(Eigen::Index state_dim, Eigen::Index theta_size) const;
  double log_theta_prior(const Vector& log_theta) const;
};

struct Trajectory {
  RowMatrix states;        // T x n_x
  RowMatrix inputs;        // T x n_u, may have zero columns
  RowMatrix observations;  // T x n_y

  Eigen::Index length() const { return states.rows(); }
};

Vector transition_mean(const RRGPSSM& model, const Eigen::Ref<const Vector>& x,
                       const Eigen::Ref<const Vector>& u = Vector());

/// Lower factor usable for Gaussian noise draws. An all-zero covariance gives
/// a zero factor (noise-free); otherwise the covariance must be SPD.
Matrix noise_factor(const Matrix& cov, const std::string& what);

/// Simulates T steps. `inputs` is T x n_u, or empty for autonomous models.
Trajectory simulate(const RRGPSSM& model, Eigen::Index T, Rng& rng,
                    const RowMatrix& inputs = RowMatrix());

/// log N(y | g(x), R).
double obs_loglik(const RRGPSSM& model, const Eigen::Ref<const Vector>& x,
                  const Eigen::Ref<const Vector>& y);

}  // namespace rrgp
