#pragma once

// Densities and samplers for the matrix-normal / inverse-Wishart family.
//
// Conventions: A ~ MN(M, Q, V) has mean M (n x m), row covariance Q (n x n)
// and left precision V (m x m), i.e. Cov(vec A) = V^{-1} (x) Q.
// Q ~ IW(l, Lambda) has density
//   |Lambda|^{l/2} |Q|^{-(n+l+1)/2} exp(-tr(Q^{-1} Lambda)/2) / (2^{ln/2} Gamma_n(l/2)).

#include "rrgp/common.hpp"
#include "rrgp/random.hpp"

namespace rrgp {

double log_multivariate_gamma(int n, double a);

/// log N(x | mean, L L^T) for a lower Cholesky factor L.
double mvn_logpdf_chol(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& mean,
                       const Matrix& L);
double mvn_logpdf(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& mean,
                  const Matrix& cov);

double mn_logpdf(const Matrix& A, const Matrix& M, const Matrix& Q, const Matrix& V);

double iw_logpdf(const Matrix& Q, double dof, const Matrix& Lambda);

/// M + chol(Q) X chol(V^{-1})^T with X i.i.d. standard normal.
Matrix sample_mn(const Matrix& M, const Matrix& Q, const Matrix& V_precision, Rng& rng);

/// Bartlett-decomposition draw from IW(dof, Lambda); requires dof > n - 1.
Matrix sample_iw(double dof, const Matrix& Lambda, Rng& rng);

}  // namespace rrgp
