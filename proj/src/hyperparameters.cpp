#include "rrgp/hyperparameters.hpp"

#include "rrgp/distributions.hpp"
#include "rrgp/linalg.hpp"

#include <cmath>
#include <limits>

namespace rrgp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log MN(A | 0, Q, diag(exp(log_v))) without forming V; tolerates overflowing
// precisions, which give -inf unless the matching column of A is zero.
double mn_prior_logpdf(const Matrix& A, const Matrix& Lq, const Vector& log_v) {
  const double n = static_cast<double>(A.rows());
  const double m = static_cast<double>(A.cols());
  const Matrix W = Lq.triangularView<Eigen::Lower>().solve(A);
  double quad = 0.0;
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    const double c = W.col(j).squaredNorm();
    if (c == 0.0) continue;
    quad += std::exp(log_v[j]) * c;
  }
  return 0.5 * n * log_v.sum() - 0.5 * n * m * kLog2Pi - 0.5 * m * log_det_from_cholesky(Lq) -
         0.5 * quad;
}

}  // namespace

std::string to_string(ThetaTarget target) {
  return target == ThetaTarget::Conditional ? "conditional" : "conjugate_product";
}

ThetaTarget theta_target_from_string(const std::string& name) {
  if (name == "conditional") return ThetaTarget::Conditional;
  if (name == "conjugate_product") return ThetaTarget::ConjugateProduct;
  throw std::invalid_argument("unknown theta target '" + name + "'");
}

double theta_log_target(const Vector& log_theta, const ThetaTargetInputs& in) {
  const Eigen::ArrayXd natural = log_theta.array().exp();
  if (!natural.allFinite() || (natural <= 0.0).any()) return kNegInf;
  const Vector log_v = in.features.log_precision(log_theta);
  if (!log_v.allFinite()) return kNegInf;
  double lp = in.prior.log_theta_prior(log_theta);
  if (in.target == ThetaTarget::Conditional) {
    const Matrix Lq = robust_cholesky(in.Q, "process noise Q");
    lp += mn_prior_logpdf(in.A, Lq, log_v);
  } else {
    const Vector v = log_v.array().exp();
    if (!v.allFinite()) return kNegInf;
    try {
      const MniwPosterior post =
          mniw_posterior(in.stats, v, in.prior.q_dof, in.prior.q_scale, in.T_eff);
      lp += iw_logpdf(in.Q, post.dof, post.scale);
      lp += mn_logpdf(in.A, post.mean, in.Q, post.precision);
    } catch (const NumericalError&) {
      return kNegInf;
    }
  }
  return std::isnan(lp) ? kNegInf : lp;
}

MhStep mh_hyperparameter_step(const Vector& log_theta, const ThetaTargetInputs& in,
                              const Vector& proposal_scale, Rng& rng) {
  require_dim(proposal_scale.size() == log_theta.size(), "proposal scale has wrong length");
  const double current = theta_log_target(log_theta, in);
  if (!std::isfinite(current))
    throw NumericalError("hyperparameter target is not finite at the current theta");

  Vector proposal = log_theta;
  for (Eigen::Index i = 0; i < proposal.size(); ++i) {
    if (proposal_scale[i] > 0.0) proposal[i] += proposal_scale[i] * rng.normal();
  }
  const double candidate = theta_log_target(proposal, in);
  const double log_u = std::log(rng.uniform());
  if (std::isfinite(candidate) && log_u < candidate - current) {
    return {proposal, true, candidate};
  }
  return {log_theta, false, current};
}

}  // namespace rrgp
