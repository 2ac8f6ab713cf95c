#pragma once

#include "rrgp/common.hpp"

#include <string>

namespace rrgp {

/// Lower Cholesky factor of a symmetric matrix. A plain factorization is tried
/// first; on failure a diagonal jitter of 1e-9 * trace/n is added and grown by
/// x10 up to 1e-3 * trace/n before NumericalError is thrown. `what` names the
/// matrix in the error message.
Matrix robust_cholesky(const Matrix& S, const std::string& what);

/// log|S| from a lower Cholesky factor.
double log_det_from_cholesky(const Matrix& L);

/// Inverse of an SPD matrix given its lower Cholesky factor.
Matrix spd_inverse_from_cholesky(const Matrix& L);

inline Matrix symmetrize(const Matrix& S) { return 0.5 * (S + S.transpose()); }

/// Packs the lower triangle row by row: (0,0), (1,0), (1,1), (2,0), ...
Vector lower_triangle(const Matrix& S);
Matrix from_lower_triangle(const Vector& packed, Eigen::Index n);

}  // namespace rrgp
