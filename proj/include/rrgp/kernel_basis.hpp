#pragma once

// Laplace-operator eigenbasis on a rectangle [-L_1, L_1] x ... x [-L_d, L_d]
// with Dirichlet boundary conditions, together with the spectral densities
// that turn it into a reduced-rank stationary covariance:
//
//   k(x, x') ~= sum_j S(omega_j) phi_j(x) phi_j(x'),   |omega_j|^2 = lambda_j.
//
// Eigenvalues and eigenfunctions depend only on the domain; kernel
// hyperparameters enter through S alone.

#include "rrgp/common.hpp"

#include <string>
#include <vector>

namespace rrgp {

class Domain {
 public:
  explicit Domain(std::vector<double> half_widths);

  std::size_t dim() const { return half_widths_.size(); }
  double half_width(std::size_t k) const { return half_widths_[k]; }
  const std::vector<double>& half_widths() const { return half_widths_; }

  bool contains(const Eigen::Ref<const Vector>& x) const;

 private:
  std::vector<double> half_widths_;
};

/// Multi-index (j_1, ..., j_d), every entry >= 1.
struct BasisIndex {
  std::vector<int> j;

  auto operator<=>(const BasisIndex&) const = default;
};

enum class KernelFamily { SquaredExponential, Matern };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

struct KernelSpec {
  KernelFamily family = KernelFamily::SquaredExponential;
  double variance = 1.0;
  /// One per input dimension. Matern is isotropic: all entries must agree.
  std::vector<double> lengthscales{1.0};
  double matern_nu = 1.5;

  /// Throws std::invalid_argument on non-positive values and DimensionError
  /// when the lengthscale count differs from `dim`.
  void validate(std::size_t dim) const;
};

double eigenvalue(const BasisIndex& index, const Domain& domain);

/// Angular frequency vector (pi j_k / 2 L_k)_k; its squared norm is the eigenvalue.
Vector eigenfrequency(const BasisIndex& index, const Domain& domain);

/// prod_k L_k^{-1/2} sin(pi j_k (x_k + L_k) / (2 L_k)). Points outside the
/// domain are evaluated by the same formula.
double eigenfunction(const BasisIndex& index, const Domain& domain,
                     const Eigen::Ref<const Vector>& x);

double spectral_density(const KernelSpec& kernel, const Eigen::Ref<const Vector>& omega);
double log_spectral_density(const KernelSpec& kernel, const Eigen::Ref<const Vector>& omega);

/// Closed-form stationary covariance k(x - x'); used for convergence checks.
double exact_covariance(const KernelSpec& kernel, const Eigen::Ref<const Vector>& x,
                        const Eigen::Ref<const Vector>& xp);

class BasisConfig {
 public:
  /// Indices are stored in canonical order: ascending eigenvalue, ties
  /// broken lexicographically on the multi-index. Duplicates are rejected.
  BasisConfig(Domain domain, std::vector<BasisIndex> indices, KernelSpec kernel);

  /// Full tensor grid j_k in {1..per_dim[k]}.
  static BasisConfig tensor_grid(Domain domain, const std::vector<int>& per_dim,
                                 KernelSpec kernel);

  std::size_t size() const { return indices_.size(); }
  std::size_t dim() const { return domain_.dim(); }
  const Domain& domain() const { return domain_; }
  const std::vector<BasisIndex>& indices() const { return indices_; }
  const KernelSpec& kernel() const { return kernel_; }
  const Vector& eigenvalues() const { return eigenvalues_; }

  BasisConfig with_kernel(KernelSpec kernel) const;

  /// Writes Phi(x) into `out` (size m).
  void evaluate(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> out) const;

  /// log S(omega_j) for every basis function, in canonical order.
  Vector log_spectral_weights() const;

 private:
  Domain domain_;
  std::vector<BasisIndex> indices_;
  KernelSpec kernel_;
  Vector eigenvalues_;
  Matrix frequencies_;  // m x d
};

Vector basis_vector(const BasisConfig& config, const Eigen::Ref<const Vector>& x);

double approx_covariance(const BasisConfig& config, const Eigen::Ref<const Vector>& x,
                         const Eigen::Ref<const Vector>& xp);

/// diag(1 / S(omega_j)). Throws NumericalError naming the first index whose
/// spectral density underflows.
Vector prior_precision(const BasisConfig& config);

}  // namespace rrgp
