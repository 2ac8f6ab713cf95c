#include "rrgp/model.hpp"

#include "rrgp/distributions.hpp"
#include "rrgp/linalg.hpp"

#include <cmath>

namespace rrgp {

Vector ObservationModel::regressors(const Eigen::Ref<const Vector>& x) const {
  if (!features) return x;
  return features->evaluate(x, Vector());
}

Vector ObservationModel::mean(const Eigen::Ref<const Vector>& x) const {
  if (!features) {
    require_dim(C.cols() == x.size(), "observation matrix C does not match state dimension");
    return C * x;
  }
  return C * features->evaluate(x, Vector());
}

void RRGPSSM::validate() const {
  if (!features) throw std::invalid_argument("model has no feature map");
  const Eigen::Index nx = A.rows();
  require_dim(features->state_dim() == nx, "feature map state dimension != rows of A");
  require_dim(A.cols() == features->size(), "columns of A != number of features");
  require_dim(Q.rows() == nx && Q.cols() == nx, "Q must be n_x x n_x");
  const Eigen::Index k = observation.features ? observation.features->size() : nx;
  require_dim(observation.C.cols() == k, "C has wrong number of columns");
  require_dim(observation.R.rows() == observation.C.rows() &&
                  observation.R.cols() == observation.C.rows(),
              "R must be n_y x n_y");
  require_dim(x1.mean.size() == nx && x1.cov.rows() == nx && x1.cov.cols() == nx,
              "initial state distribution has wrong dimension");
  noise_factor(Q, "process noise Q");
  noise_factor(observation.R, "measurement noise R");
  noise_factor(x1.cov, "initial state covariance");
}

PriorSpec PriorSpec::defaults(Eigen::Index state_dim, Eigen::Index theta_size) {
  PriorSpec p;
  p.q_dof = 10.0;
  p.q_scale = Matrix::Identity(state_dim, state_dim);
  p.theta_mean = Vector::Zero(theta_size);
  p.theta_std = Vector::Constant(theta_size, 2.0);
  return p;
}

void PriorSpec::validate(Eigen::Index state_dim, Eigen::Index theta_size) const {
  if (!(q_dof > static_cast<double>(state_dim) - 1.0))
    throw std::invalid_argument("Q prior degrees of freedom must exceed n_x - 1");
  require_dim(q_scale.rows() == state_dim && q_scale.cols() == state_dim,
              "Q prior scale must be n_x x n_x");
  robust_cholesky(q_scale, "Q prior scale");
  require_dim(theta_mean.size() == theta_size && theta_std.size() == theta_size,
              "theta prior has wrong length");
  if ((theta_std.array() <= 0.0).any())
    throw std::invalid_argument("theta prior standard deviations must be positive");
}

double PriorSpec::log_theta_prior(const Vector& log_theta) const {
  require_dim(log_theta.size() == theta_mean.size(), "theta has wrong length");
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  double lp = 0.0;
  for (Eigen::Index i = 0; i < log_theta.size(); ++i) {
    const double z = (log_theta[i] - theta_mean[i]) / theta_std[i];
    lp += -0.5 * z * z - std::log(theta_std[i]) - kHalfLog2Pi;
  }
  return lp;
}

Vector transition_mean(const RRGPSSM& model, const Eigen::Ref<const Vector>& x,
                       const Eigen::Ref<const Vector>& u) {
  require_dim(x.size() == model.state_dim(), "state has wrong dimension");
  require_dim(model.A.cols() == model.features->size(), "A has wrong number of columns");
  return model.A * model.features->evaluate(x, u);
}

Matrix noise_factor(const Matrix& cov, const std::string& what) {
  if (cov.isZero(0.0)) return Matrix::Zero(cov.rows(), cov.cols());
  return robust_cholesky(cov, what);
}

Trajectory simulate(const RRGPSSM& model, Eigen::Index T, Rng& rng, const RowMatrix& inputs) {
  if (T < 1) throw std::invalid_argument("simulation length must be >= 1");
  const Eigen::Index nx = model.state_dim();
  const Eigen::Index nu = model.features->input_dim();
  if (nu > 0) {
    require_dim(inputs.rows() >= T && inputs.cols() == nu, "inputs must be T x n_u");
  }
  const Matrix Lq = noise_factor(model.Q, "process noise Q");
  const Matrix Lr = noise_factor(model.observation.R, "measurement noise R");
  const Matrix L1 = noise_factor(model.x1.cov, "initial state covariance");

  Trajectory traj;
  traj.states.resize(T, nx);
  traj.observations.resize(T, model.observation.obs_dim());
  traj.inputs = nu > 0 ? RowMatrix(inputs.topRows(T)) : RowMatrix(T, 0);

  Vector x = model.x1.mean + L1 * rng.normal_vector(nx);
  for (Eigen::Index t = 0; t < T; ++t) {
    traj.states.row(t) = x.transpose();
    traj.observations.row(t) =
        (model.observation.mean(x) + Lr * rng.normal_vector(Lr.rows())).transpose();
    if (t + 1 < T) {
      const Vector u = nu > 0 ? Vector(traj.inputs.row(t).transpose()) : Vector();
      x = transition_mean(model, x, u) + Lq * rng.normal_vector(nx);
    }
  }
  return traj;
}

double obs_loglik(const RRGPSSM& model, const Eigen::Ref<const Vector>& x,
                  const Eigen::Ref<const Vector>& y) {
  require_dim(y.size() == model.observation.obs_dim(), "observation has wrong dimension");
  return mvn_logpdf(y, model.observation.mean(x), model.observation.R);
}

}  // namespace rrgp
