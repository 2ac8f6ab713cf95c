#pragma once

// Metropolis-within-Gibbs update of the kernel hyperparameters theta, using a
// Gaussian random walk on log theta.

#include "rrgp/common.hpp"
#include "rrgp/conjugate.hpp"
#include "rrgp/features.hpp"
#include "rrgp/model.hpp"
#include "rrgp/random.hpp"

#include <string>

namespace rrgp {

enum class ThetaTarget {
  /// p(theta) MN(A | 0, Q, V(theta)): the exact full conditional of theta
  /// given (x, Q, A).
  Conditional,
  /// p(theta) IW(Q | posterior under theta) MN(A | posterior under theta),
  /// the product of the conjugate conditionals of Q and A.
  ConjugateProduct,
};

std::string to_string(ThetaTarget target);
ThetaTarget theta_target_from_string(const std::string& name);

struct ThetaTargetInputs {
  const SufficientStats& stats;
  double T_eff;
  const Matrix& Q;
  const Matrix& A;
  const FeatureMap& features;
  const PriorSpec& prior;
  ThetaTarget target = ThetaTarget::Conditional;
};

/// Unnormalized log target at log_theta; -inf where the prior precision is
/// not representable.
double theta_log_target(const Vector& log_theta, const ThetaTargetInputs& in);

struct MhStep {
  Vector log_theta;
  bool accepted = false;
  double log_target = 0.0;
};

/// One random-walk proposal log theta' = log theta + scale .* N(0, I).
/// Components with zero scale stay fixed. Throws NumericalError if the target
/// is not finite at the current theta.
MhStep mh_hyperparameter_step(const Vector& log_theta, const ThetaTargetInputs& in,
                              const Vector& proposal_scale, Rng& rng);

}  // namespace rrgp
