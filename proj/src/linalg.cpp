#include "rrgp/linalg.hpp"

#include <cmath>

namespace rrgp {

Matrix robust_cholesky(const Matrix& S, const std::string& what) {
  require_dim(S.rows() == S.cols(), what + " is not square");
  if (!S.allFinite()) throw NumericalError(what + " has non-finite entries");
  const Eigen::Index n = S.rows();
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  const double scale = n > 0 ? std::abs(S.trace()) / static_cast<double>(n) : 0.0;
  for (double jitter = 1e-9; jitter <= 1e-3 * 1.0000001; jitter *= 10.0) {
    Matrix J = S;
    J.diagonal().array() += jitter * scale;
    llt.compute(J);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw NumericalError("Cholesky factorization of " + what + " failed (not positive definite)");
}

double log_det_from_cholesky(const Matrix& L) {
  return 2.0 * L.diagonal().array().log().sum();
}

Matrix spd_inverse_from_cholesky(const Matrix& L) {
  const Matrix Linv = L.triangularView<Eigen::Lower>().solve(Matrix::Identity(L.rows(), L.cols()));
  return Linv.transpose() * Linv;
}

Vector lower_triangle(const Matrix& S) {
  const Eigen::Index n = S.rows();
  Vector packed(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) packed[k++] = S(i, j);
  return packed;
}

Matrix from_lower_triangle(const Vector& packed, Eigen::Index n) {
  require_dim(packed.size() == n * (n + 1) / 2, "packed lower triangle has wrong length");
  Matrix S(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) S(i, j) = S(j, i) = packed[k++];
  return S;
}

}  // namespace rrgp
