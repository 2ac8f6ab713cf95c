#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace rrgp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Time-major storage: row t holds the value at time t.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Inconsistent sizes between arguments.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Cholesky failure, density underflow, particle collapse and similar.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input (files, configuration).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_dim(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace rrgp
