#include "rrgp/kernel_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace rrgp {

namespace {

constexpr double kPi = std::numbers::pi;

void check_index(const BasisIndex& index, const Domain& domain) {
  require_dim(index.j.size() == domain.dim(), "basis index has " +
                                                  std::to_string(index.j.size()) +
                                                  " entries, domain has dimension " +
                                                  std::to_string(domain.dim()));
  for (int jk : index.j) {
    if (jk < 1) throw std::invalid_argument("basis index entries must be >= 1");
  }
}

std::string describe(const BasisIndex& index) {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < index.j.size(); ++k) os << (k ? "," : "") << index.j[k];
  os << ')';
  return os.str();
}

}  // namespace

Domain::Domain(std::vector<double> half_widths) : half_widths_(std::move(half_widths)) {
  if (half_widths_.empty()) throw std::invalid_argument("domain needs at least one dimension");
  for (double L : half_widths_) {
    if (!(L > 0.0) || !std::isfinite(L))
      throw std::invalid_argument("domain half-widths must be positive and finite");
  }
}

bool Domain::contains(const Eigen::Ref<const Vector>& x) const {
  require_dim(static_cast<std::size_t>(x.size()) == dim(), "point/domain dimension mismatch");
  for (std::size_t k = 0; k < dim(); ++k) {
    if (std::abs(x[k]) > half_widths_[k]) return false;
  }
  return true;
}

std::string to_string(KernelFamily family) {
  return family == KernelFamily::SquaredExponential ? "se" : "matern";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "se" || name == "squared_exponential") return KernelFamily::SquaredExponential;
  if (name == "matern") return KernelFamily::Matern;
  throw std::invalid_argument("unknown kernel family '" + name + "'");
}

void KernelSpec::validate(std::size_t dim) const {
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw std::invalid_argument("kernel variance must be positive");
  require_dim(lengthscales.size() == dim, "kernel has " + std::to_string(lengthscales.size()) +
                                             " lengthscales for input dimension " +
                                             std::to_string(dim));
  for (double l : lengthscales) {
    if (!(l > 0.0) || !std::isfinite(l))
      throw std::invalid_argument("kernel lengthscales must be positive");
  }
  if (family == KernelFamily::Matern) {
    if (!(matern_nu > 0.0)) throw std::invalid_argument("Matern nu must be positive");
    for (double l : lengthscales) {
      if (l != lengthscales.front())
        throw std::invalid_argument("Matern kernel is isotropic: lengthscales must agree");
    }
  }
}

double eigenvalue(const BasisIndex& index, const Domain& domain) {
  return eigenfrequency(index, domain).squaredNorm();
}

Vector eigenfrequency(const BasisIndex& index, const Domain& domain) {
  check_index(index, domain);
  Vector omega(domain.dim());
  for (std::size_t k = 0; k < domain.dim(); ++k)
    omega[k] = kPi * index.j[k] / (2.0 * domain.half_width(k));
  return omega;
}

double eigenfunction(const BasisIndex& index, const Domain& domain,
                     const Eigen::Ref<const Vector>& x) {
  check_index(index, domain);
  require_dim(static_cast<std::size_t>(x.size()) == domain.dim(),
              "point/domain dimension mismatch");
  double value = 1.0;
  for (std::size_t k = 0; k < domain.dim(); ++k) {
    const double L = domain.half_width(k);
    value *= std::sin(kPi * index.j[k] * (x[k] + L) / (2.0 * L)) / std::sqrt(L);
  }
  return value;
}

double log_spectral_density(const KernelSpec& kernel, const Eigen::Ref<const Vector>& omega) {
  const auto d = static_cast<std::size_t>(omega.size());
  kernel.validate(d);
  const double dd = static_cast<double>(d);
  if (kernel.family == KernelFamily::SquaredExponential) {
    double log_s = std::log(kernel.variance) + 0.5 * dd * std::log(2.0 * kPi);
    for (std::size_t k = 0; k < d; ++k) {
      const double l = kernel.lengthscales[k];
      log_s += std::log(l) - 0.5 * l * l * omega[k] * omega[k];
    }
    return log_s;
  }
  const double nu = kernel.matern_nu;
  const double l = kernel.lengthscales.front();
  return std::log(kernel.variance) + dd * std::log(2.0) + 0.5 * dd * std::log(kPi) +
         std::lgamma(nu + 0.5 * dd) + nu * std::log(2.0 * nu) - std::lgamma(nu) -
         2.0 * nu * std::log(l) -
         (nu + 0.5 * dd) * std::log(2.0 * nu / (l * l) + omega.squaredNorm());
}

double spectral_density(const KernelSpec& kernel, const Eigen::Ref<const Vector>& omega) {
  return std::exp(log_spectral_density(kernel, omega));
}

double exact_covariance(const KernelSpec& kernel, const Eigen::Ref<const Vector>& x,
                        const Eigen::Ref<const Vector>& xp) {
  require_dim(x.size() == xp.size(), "covariance arguments differ in dimension");
  kernel.validate(static_cast<std::size_t>(x.size()));
  if (kernel.family == KernelFamily::SquaredExponential) {
    double q = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double r = (x[k] - xp[k]) / kernel.lengthscales[k];
      q += r * r;
    }
    return kernel.variance * std::exp(-0.5 * q);
  }
  const double nu = kernel.matern_nu;
  const double r = (x - xp).norm() / kernel.lengthscales.front();
  if (r == 0.0) return kernel.variance;
  const double s = std::sqrt(2.0 * nu) * r;
  return kernel.variance * std::exp((1.0 - nu) * std::log(2.0) - std::lgamma(nu) +
                                    nu * std::log(s)) *
         std::cyl_bessel_k(nu, s);
}

BasisConfig::BasisConfig(Domain domain, std::vector<BasisIndex> indices, KernelSpec kernel)
    : domain_(std::move(domain)), indices_(std::move(indices)), kernel_(std::move(kernel)) {
  kernel_.validate(domain_.dim());
  std::vector<std::pair<double, BasisIndex>> keyed;
  keyed.reserve(indices_.size());
  for (const auto& index : indices_) keyed.emplace_back(eigenvalue(index, domain_), index);
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t i = 1; i < keyed.size(); ++i) {
    if (keyed[i].second == keyed[i - 1].second)
      throw std::invalid_argument("duplicate basis index " + describe(keyed[i].second));
  }
  eigenvalues_.resize(static_cast<Eigen::Index>(keyed.size()));
  frequencies_.resize(static_cast<Eigen::Index>(keyed.size()),
                      static_cast<Eigen::Index>(domain_.dim()));
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    indices_[i] = keyed[i].second;
    eigenvalues_[row] = keyed[i].first;
    frequencies_.row(row) = eigenfrequency(indices_[i], domain_).transpose();
  }
}

BasisConfig BasisConfig::tensor_grid(Domain domain, const std::vector<int>& per_dim,
                                     KernelSpec kernel) {
  require_dim(per_dim.size() == domain.dim(), "need one basis count per domain dimension");
  std::size_t total = 1;
  for (int mk : per_dim) {
    if (mk < 1) throw std::invalid_argument("basis count per dimension must be >= 1");
    total *= static_cast<std::size_t>(mk);
  }
  std::vector<BasisIndex> indices;
  indices.reserve(total);
  BasisIndex current{std::vector<int>(per_dim.size(), 1)};
  for (std::size_t n = 0; n < total; ++n) {
    indices.push_back(current);
    for (std::size_t k = per_dim.size(); k-- > 0;) {
      if (++current.j[k] <= per_dim[k]) break;
      current.j[k] = 1;
    }
  }
  return BasisConfig(std::move(domain), std::move(indices), std::move(kernel));
}

BasisConfig BasisConfig::with_kernel(KernelSpec kernel) const {
  BasisConfig copy = *this;
  kernel.validate(domain_.dim());
  copy.kernel_ = std::move(kernel);
  return copy;
}

void BasisConfig::evaluate(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> out) const {
  const std::size_t d = domain_.dim();
  require_dim(static_cast<std::size_t>(x.size()) == d, "point/domain dimension mismatch");
  require_dim(static_cast<std::size_t>(out.size()) == indices_.size(), "output size != m");
  // Per-dimension sine tables shared by all multi-indices.
  thread_local std::vector<std::vector<double>> table;
  table.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    int jmax = 0;
    for (const auto& index : indices_) jmax = std::max(jmax, index.j[k]);
    const double L = domain_.half_width(k);
    const double scale = 1.0 / std::sqrt(L);
    const double arg = kPi * (x[static_cast<Eigen::Index>(k)] + L) / (2.0 * L);
    table[k].resize(static_cast<std::size_t>(jmax) + 1);
    for (int j = 1; j <= jmax; ++j) table[k][static_cast<std::size_t>(j)] = scale * std::sin(j * arg);
  }
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    double value = 1.0;
    for (std::size_t k = 0; k < d; ++k) value *= table[k][static_cast<std::size_t>(indices_[i].j[k])];
    out[static_cast<Eigen::Index>(i)] = value;
  }
}

Vector BasisConfig::log_spectral_weights() const {
  Vector out(static_cast<Eigen::Index>(indices_.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out[i] = log_spectral_density(kernel_, frequencies_.row(i).transpose());
  return out;
}

Vector basis_vector(const BasisConfig& config, const Eigen::Ref<const Vector>& x) {
  Vector out(static_cast<Eigen::Index>(config.size()));
  config.evaluate(x, out);
  return out;
}

double approx_covariance(const BasisConfig& config, const Eigen::Ref<const Vector>& x,
                         const Eigen::Ref<const Vector>& xp) {
  if (config.size() == 0) return 0.0;
  const Vector phi = basis_vector(config, x);
  const Vector phip = basis_vector(config, xp);
  const Vector weights = config.log_spectral_weights().array().exp();
  return (weights.array() * phi.array() * phip.array()).sum();
}

Vector prior_precision(const BasisConfig& config) {
  const Vector log_s = config.log_spectral_weights();
  Vector precision(log_s.size());
  for (Eigen::Index i = 0; i < log_s.size(); ++i) {
    precision[i] = std::exp(-log_s[i]);
    if (!std::isfinite(precision[i]) || std::exp(log_s[i]) == 0.0) {
      throw NumericalError("spectral density underflows at basis index " +
                           describe(config.indices()[static_cast<std::size_t>(i)]) +
                           " (log S = " + std::to_string(log_s[i]) + ")");
    }
  }
  return precision;
}

}  // namespace rrgp
