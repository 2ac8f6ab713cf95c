#pragma once

// Regressor maps z = Phi(x, u) for models that are linear in their weights,
// x_{t+1} = A Phi(x_t, u_t) + w_t. Each map also owns the hyperparameter
// vector theta (log scale) and its mapping to the diagonal prior precision of
// the weights, so the learner never needs to know which kernel is behind it.

#include "rrgp/common.hpp"
#include "rrgp/kernel_basis.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rrgp {

class FeatureMap {
 public:
  virtual ~FeatureMap() = default;

  /// Number of regressors m.
  virtual Eigen::Index size() const = 0;
  virtual Eigen::Index state_dim() const = 0;
  /// 0 when the map ignores exogenous inputs.
  virtual Eigen::Index input_dim() const { return 0; }

  /// Writes Phi(x, u) into `out`. `u` is ignored when input_dim() == 0.
  virtual void evaluate(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& u,
                        Eigen::Ref<Vector> out) const = 0;

  /// True when x lies inside the region the basis is built on.
  virtual bool in_domain(const Eigen::Ref<const Vector>& x) const = 0;

  virtual Eigen::Index theta_size() const { return 0; }
  virtual std::vector<std::string> theta_names() const { return {}; }
  /// Hyperparameters stored with the map, on log scale.
  virtual Vector default_log_theta() const { return Vector(0); }
  /// log of the diagonal prior precision of the weight columns under theta.
  virtual Vector log_precision(const Vector& log_theta) const = 0;

  /// exp(log_precision); throws NumericalError if an entry overflows.
  Vector precision(const Vector& log_theta) const;

  Vector evaluate(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& u) const;
};

using FeatureMapPtr = std::shared_ptr<const FeatureMap>;

/// Reduced-rank GP features: the Laplace eigenbasis over the state, optionally
/// concatenated with a second eigenbasis over the input for the additive
/// structure f_x(x) + f_u(u). theta packs [log variance, log lengthscales...]
/// for the state kernel followed by the same for the input kernel; a Matern
/// kernel contributes a single lengthscale.
class HilbertFeatures final : public FeatureMap {
 public:
  explicit HilbertFeatures(BasisConfig state_basis,
                           std::optional<BasisConfig> input_basis = std::nullopt);

  Eigen::Index size() const override;
  Eigen::Index state_dim() const override;
  Eigen::Index input_dim() const override;
  using FeatureMap::evaluate;
  void evaluate(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& u,
                Eigen::Ref<Vector> out) const override;
  bool in_domain(const Eigen::Ref<const Vector>& x) const override;

  Eigen::Index theta_size() const override;
  std::vector<std::string> theta_names() const override;
  Vector default_log_theta() const override;
  Vector log_precision(const Vector& log_theta) const override;

  const BasisConfig& state_basis() const { return state_; }
  const std::optional<BasisConfig>& input_basis() const { return input_; }

  /// Kernels encoded by theta: state kernel first, then the input kernel.
  std::vector<KernelSpec> kernels(const Vector& log_theta) const;

 private:
  BasisConfig state_;
  std::optional<BasisConfig> input_;
};

/// z = x: the model becomes linear-Gaussian, x_{t+1} = A x_t + w_t. The
/// prior precision is fixed and there are no hyperparameters.
class LinearFeatures final : public FeatureMap {
 public:
  LinearFeatures(Eigen::Index state_dim, Vector precision);

  Eigen::Index size() const override { return dim_; }
  Eigen::Index state_dim() const override { return dim_; }
  using FeatureMap::evaluate;
  void evaluate(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& u,
                Eigen::Ref<Vector> out) const override;
  bool in_domain(const Eigen::Ref<const Vector>&) const override { return true; }
  Vector log_precision(const Vector& log_theta) const override;

 private:
  Eigen::Index dim_;
  Vector log_precision_;
};

}  // namespace rrgp
