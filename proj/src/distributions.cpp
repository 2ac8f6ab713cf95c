#include "rrgp/distributions.hpp"

#include "rrgp/linalg.hpp"

#include <cmath>
#include <numbers>

namespace rrgp {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void check_dof(double dof, Eigen::Index n) {
  if (!(dof > static_cast<double>(n) - 1.0))
    throw std::invalid_argument("inverse-Wishart degrees of freedom must exceed n - 1");
}
}  // namespace

double log_multivariate_gamma(int n, double a) {
  double out = 0.25 * n * (n - 1) * std::log(std::numbers::pi);
  for (int j = 1; j <= n; ++j) out += std::lgamma(a + 0.5 * (1 - j));
  return out;
}

double mvn_logpdf_chol(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& mean,
                       const Matrix& L) {
  require_dim(x.size() == mean.size() && x.size() == L.rows(), "mvn_logpdf dimension mismatch");
  const Vector r = L.triangularView<Eigen::Lower>().solve(x - mean);
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + r.squaredNorm()) -
         0.5 * log_det_from_cholesky(L);
}

double mvn_logpdf(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& mean,
                  const Matrix& cov) {
  return mvn_logpdf_chol(x, mean, robust_cholesky(cov, "covariance"));
}

double mn_logpdf(const Matrix& A, const Matrix& M, const Matrix& Q, const Matrix& V) {
  require_dim(A.rows() == M.rows() && A.cols() == M.cols(), "MN: A and M differ in shape");
  require_dim(Q.rows() == A.rows() && Q.cols() == A.rows(), "MN: Q must be n x n");
  require_dim(V.rows() == A.cols() && V.cols() == A.cols(), "MN: V must be m x m");
  const double n = static_cast<double>(A.rows());
  const double m = static_cast<double>(A.cols());
  const Matrix Lq = robust_cholesky(Q, "MN row covariance");
  const Matrix Lv = robust_cholesky(V, "MN left precision");
  // tr((A-M)^T Q^{-1} (A-M) V) = || Lq^{-1} (A-M) Lv ||_F^2
  const Matrix W = Lq.triangularView<Eigen::Lower>().solve(A - M) * Lv;
  return 0.5 * n * log_det_from_cholesky(Lv) - 0.5 * n * m * kLog2Pi -
         0.5 * m * log_det_from_cholesky(Lq) - 0.5 * W.squaredNorm();
}

double iw_logpdf(const Matrix& Q, double dof, const Matrix& Lambda) {
  const Eigen::Index n = Q.rows();
  require_dim(Q.cols() == n && Lambda.rows() == n && Lambda.cols() == n,
              "IW: Q and Lambda must be n x n");
  check_dof(dof, n);
  const Matrix Lq = robust_cholesky(Q, "IW argument");
  const Matrix Ll = robust_cholesky(Lambda, "IW scale");
  // tr(Q^{-1} Lambda) = || Lq^{-1} Ll ||_F^2
  const Matrix W = Lq.triangularView<Eigen::Lower>().solve(Ll);
  const double nd = static_cast<double>(n);
  return 0.5 * dof * log_det_from_cholesky(Ll) -
         0.5 * (nd + dof + 1.0) * log_det_from_cholesky(Lq) - 0.5 * W.squaredNorm() -
         0.5 * dof * nd * std::numbers::ln2 -
         log_multivariate_gamma(static_cast<int>(n), 0.5 * dof);
}

Matrix sample_mn(const Matrix& M, const Matrix& Q, const Matrix& V_precision, Rng& rng) {
  require_dim(Q.rows() == M.rows() && Q.cols() == M.rows(), "MN: Q must be n x n");
  require_dim(V_precision.rows() == M.cols() && V_precision.cols() == M.cols(),
              "MN: V must be m x m");
  const Matrix Lq = robust_cholesky(Q, "MN row covariance");
  const Matrix Lv = robust_cholesky(V_precision, "MN left precision");
  const Matrix X = rng.normal_matrix(M.rows(), M.cols());
  // chol(V^{-1}) = Lv^{-T}, so X chol(V^{-1})^T = X Lv^{-1} = (Lv^{-T} X^T)^T.
  const Matrix XLvinv =
      Lv.transpose().triangularView<Eigen::Upper>().solve(X.transpose()).transpose();
  return M + Lq * XLvinv;
}

Matrix sample_iw(double dof, const Matrix& Lambda, Rng& rng) {
  const Eigen::Index n = Lambda.rows();
  require_dim(Lambda.cols() == n, "IW scale must be square");
  check_dof(dof, n);
  const Matrix L = robust_cholesky(Lambda, "IW scale");
  // Q^{-1} ~ W(dof, Lambda^{-1}) = L^{-T} B B^T L^{-1} with Bartlett factor B.
  Matrix B = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    B(i, i) = std::sqrt(rng.chi_squared(dof - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) B(i, j) = rng.normal();
  }
  // Q = (L B^{-T})(L B^{-T})^T
  const Matrix Y =
      B.triangularView<Eigen::Lower>().solve(L.transpose()).transpose();
  return symmetrize(Y * Y.transpose());
}

}  // namespace rrgp
