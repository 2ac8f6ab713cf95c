#include "rrgp/features.hpp"

#include <cmath>

namespace rrgp {

namespace {

Eigen::Index kernel_theta_size(const KernelSpec& k) {
  return k.family == KernelFamily::Matern ? 2 : 1 + static_cast<Eigen::Index>(k.lengthscales.size());
}

void pack_kernel(const KernelSpec& k, Vector& out, Eigen::Index& pos) {
  out[pos++] = std::log(k.variance);
  if (k.family == KernelFamily::Matern) {
    out[pos++] = std::log(k.lengthscales.front());
  } else {
    for (double l : k.lengthscales) out[pos++] = std::log(l);
  }
}

KernelSpec unpack_kernel(const KernelSpec& base, const Vector& theta, Eigen::Index& pos) {
  KernelSpec k = base;
  k.variance = std::exp(theta[pos++]);
  if (k.family == KernelFamily::Matern) {
    const double l = std::exp(theta[pos++]);
    for (double& lk : k.lengthscales) lk = l;
  } else {
    for (double& lk : k.lengthscales) lk = std::exp(theta[pos++]);
  }
  return k;
}

void name_kernel(const KernelSpec& k, const std::string& prefix, std::vector<std::string>& out) {
  out.push_back(prefix + ".variance");
  if (k.family == KernelFamily::Matern) {
    out.push_back(prefix + ".lengthscale");
  } else {
    for (std::size_t i = 0; i < k.lengthscales.size(); ++i)
      out.push_back(prefix + ".lengthscale[" + std::to_string(i) + "]");
  }
}

}  // namespace

Vector FeatureMap::precision(const Vector& log_theta) const {
  const Vector lp = log_precision(log_theta);
  Vector p = lp.array().exp();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] == 0.0)
      throw NumericalError("prior precision of basis function " + std::to_string(i) +
                           " is not representable (log precision " + std::to_string(lp[i]) +
                           ")");
  }
  return p;
}

Vector FeatureMap::evaluate(const Eigen::Ref<const Vector>& x,
                            const Eigen::Ref<const Vector>& u) const {
  Vector out(size());
  evaluate(x, u, out);
  return out;
}

HilbertFeatures::HilbertFeatures(BasisConfig state_basis, std::optional<BasisConfig> input_basis)
    : state_(std::move(state_basis)), input_(std::move(input_basis)) {
  if (state_.size() == 0) throw std::invalid_argument("state basis needs at least one function");
  if (input_ && input_->size() == 0)
    throw std::invalid_argument("input basis needs at least one function");
}

Eigen::Index HilbertFeatures::size() const {
  return static_cast<Eigen::Index>(state_.size() + (input_ ? input_->size() : 0));
}

Eigen::Index HilbertFeatures::state_dim() const {
  return static_cast<Eigen::Index>(state_.dim());
}

Eigen::Index HilbertFeatures::input_dim() const {
  return input_ ? static_cast<Eigen::Index>(input_->dim()) : 0;
}

void HilbertFeatures::evaluate(const Eigen::Ref<const Vector>& x,
                               const Eigen::Ref<const Vector>& u,
                               Eigen::Ref<Vector> out) const {
  require_dim(out.size() == size(), "feature output has wrong size");
  const auto ms = static_cast<Eigen::Index>(state_.size());
  state_.evaluate(x, out.head(ms));
  if (input_) {
    require_dim(u.size() == input_dim(), "input vector has wrong dimension");
    input_->evaluate(u, out.tail(size() - ms));
  }
}

bool HilbertFeatures::in_domain(const Eigen::Ref<const Vector>& x) const {
  return state_.domain().contains(x);
}

Eigen::Index HilbertFeatures::theta_size() const {
  return kernel_theta_size(state_.kernel()) + (input_ ? kernel_theta_size(input_->kernel()) : 0);
}

std::vector<std::string> HilbertFeatures::theta_names() const {
  std::vector<std::string> names;
  name_kernel(state_.kernel(), "state", names);
  if (input_) name_kernel(input_->kernel(), "input", names);
  return names;
}

Vector HilbertFeatures::default_log_theta() const {
  Vector theta(theta_size());
  Eigen::Index pos = 0;
  pack_kernel(state_.kernel(), theta, pos);
  if (input_) pack_kernel(input_->kernel(), theta, pos);
  return theta;
}

std::vector<KernelSpec> HilbertFeatures::kernels(const Vector& log_theta) const {
  require_dim(log_theta.size() == theta_size(), "theta has wrong length");
  std::vector<KernelSpec> out;
  Eigen::Index pos = 0;
  out.push_back(unpack_kernel(state_.kernel(), log_theta, pos));
  if (input_) out.push_back(unpack_kernel(input_->kernel(), log_theta, pos));
  return out;
}

Vector HilbertFeatures::log_precision(const Vector& log_theta) const {
  const auto ks = kernels(log_theta);
  const auto ms = static_cast<Eigen::Index>(state_.size());
  Vector out(size());
  out.head(ms) = -state_.with_kernel(ks[0]).log_spectral_weights();
  if (input_) out.tail(size() - ms) = -input_->with_kernel(ks[1]).log_spectral_weights();
  return out;
}

LinearFeatures::LinearFeatures(Eigen::Index state_dim, Vector precision)
    : dim_(state_dim), log_precision_(precision.array().log()) {
  require_dim(precision.size() == state_dim, "linear features: precision length != state dim");
  if ((precision.array() <= 0.0).any())
    throw std::invalid_argument("linear features: precision must be positive");
}

void LinearFeatures::evaluate(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>&,
                              Eigen::Ref<Vector> out) const {
  require_dim(x.size() == dim_ && out.size() == dim_, "linear features dimension mismatch");
  out = x;
}

Vector LinearFeatures::log_precision(const Vector& log_theta) const {
  require_dim(log_theta.size() == 0, "linear features take no hyperparameters");
  return log_precision_;
}

}  // namespace rrgp
