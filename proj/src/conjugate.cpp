#include "rrgp/conjugate.hpp"

#include "rrgp/distributions.hpp"
#include "rrgp/linalg.hpp"

#include <Eigen/Eigenvalues>

namespace rrgp {

SufficientStats SufficientStats::zeros(Eigen::Index n, Eigen::Index m) {
  return {Matrix::Zero(n, n), Matrix::Zero(n, m), Matrix::Zero(m, m), 0.0};
}

SufficientStats& SufficientStats::operator+=(const SufficientStats& other) {
  require_dim(Phi.rows() == other.Phi.rows() && Sigma.rows() == other.Sigma.rows(),
              "cannot add statistics of different shapes");
  Phi += other.Phi;
  Psi += other.Psi;
  Sigma += other.Sigma;
  count += other.count;
  return *this;
}

SufficientStats regression_statistics(const RowMatrix& targets, const RowMatrix& regressors) {
  require_dim(targets.rows() == regressors.rows(), "targets and regressors differ in length");
  SufficientStats s;
  s.Phi = targets.transpose() * targets;
  s.Psi = targets.transpose() * regressors;
  s.Sigma = Matrix::Zero(regressors.cols(), regressors.cols());
  s.Sigma.selfadjointView<Eigen::Lower>().rankUpdate(regressors.transpose());
  s.Sigma = s.Sigma.selfadjointView<Eigen::Lower>();
  s.count = static_cast<double>(targets.rows());
  return s;
}

SufficientStats sufficient_statistics(const RowMatrix& states, const RowMatrix& inputs,
                                      const FeatureMap& features) {
  const Eigen::Index T = states.rows();
  if (T < 2) throw std::invalid_argument("sufficient statistics need a trajectory with T >= 2");
  require_dim(states.cols() == features.state_dim(), "trajectory has wrong state dimension");
  const bool has_inputs = features.input_dim() > 0;
  if (has_inputs) require_dim(inputs.rows() >= T - 1, "inputs shorter than trajectory");
  RowMatrix Z(T - 1, features.size());
  Vector z(features.size());
  const Vector none;
  for (Eigen::Index t = 0; t + 1 < T; ++t) {
    if (has_inputs)
      features.evaluate(states.row(t).transpose(), inputs.row(t).transpose(), z);
    else
      features.evaluate(states.row(t).transpose(), none, z);
    Z.row(t) = z.transpose();
  }
  return regression_statistics(states.bottomRows(T - 1), Z);
}

MniwPosterior mniw_posterior(const SufficientStats& stats, const Vector& V, double prior_dof,
                             const Matrix& prior_scale, double T_eff) {
  const Eigen::Index n = stats.Phi.rows();
  const Eigen::Index m = stats.Sigma.rows();
  require_dim(V.size() == m, "prior precision length != number of regressors");
  require_dim(prior_scale.rows() == n && prior_scale.cols() == n, "prior scale must be n x n");
  MniwPosterior post;
  post.precision = stats.Sigma;
  post.precision.diagonal() += V;
  const Matrix L = robust_cholesky(post.precision, "Sigma + V");
  // mean = Psi P^{-1}  <=>  P mean^T = Psi^T
  const Matrix meanT = L.transpose().triangularView<Eigen::Upper>().solve(
      L.triangularView<Eigen::Lower>().solve(stats.Psi.transpose()));
  post.mean = meanT.transpose();
  Matrix increment = symmetrize(stats.Phi - stats.Psi * meanT);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(increment);
  const double min_ev = n > 0 ? eig.eigenvalues().minCoeff() : 0.0;
  if (min_ev < 0.0) {
    const double tol = 1e-8 * stats.Phi.norm();
    if (min_ev < -tol)
      throw NumericalError("posterior scale increment is indefinite (min eigenvalue " +
                           std::to_string(min_ev) + ")");
    const Vector clipped = eig.eigenvalues().cwiseMax(0.0);
    increment = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  }
  post.scale = symmetrize(prior_scale + increment);
  post.dof = prior_dof + T_eff;
  return post;
}

Matrix sample_Q_posterior(const SufficientStats& stats, const Vector& V, double prior_dof,
                          const Matrix& prior_scale, double T_eff, Rng& rng) {
  const MniwPosterior post = mniw_posterior(stats, V, prior_dof, prior_scale, T_eff);
  return sample_iw(post.dof, post.scale, rng);
}

Matrix sample_A_posterior(const SufficientStats& stats, const Vector& V, const Matrix& Q,
                          Rng& rng) {
  const Eigen::Index n = stats.Phi.rows();
  // The mean and precision do not depend on the IW prior; pass a dummy scale.
  const MniwPosterior post = mniw_posterior(stats, V, static_cast<double>(n),
                                            Matrix::Identity(n, n), 0.0);
  return sample_mn(post.mean, Q, post.precision, rng);
}

ObservationDraw sample_observation_model(const SufficientStats& stats,
                                         const ObservationPrior& prior, Rng& rng) {
  const MniwPosterior post =
      mniw_posterior(stats, prior.precision, prior.r_dof, prior.r_scale, stats.count);
  ObservationDraw draw;
  draw.R = sample_iw(post.dof, post.scale, rng);
  draw.C = sample_mn(post.mean, draw.R, post.precision, rng);
  return draw;
}

}  // namespace rrgp
