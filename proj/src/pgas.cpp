#include "rrgp/pgas.hpp"

#include "rrgp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace rrgp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

RowMatrix input_row_or_empty(const RowMatrix& inputs, Eigen::Index t) {
  if (inputs.cols() == 0) return RowMatrix(1, 0);
  return inputs.row(t);
}

PgasResult run_filter(const RRGPSSM& model, const RowMatrix* reference,
                      const RowMatrix& y, const RowMatrix& u, int N, Rng& rng,
                      ParticleSystem* out) {
  model.validate();
  if (N < 2) throw std::invalid_argument("particle count must be >= 2");
  const Eigen::Index T = y.rows();
  const Eigen::Index nx = model.state_dim();
  if (T < 1) throw std::invalid_argument("observation sequence is empty");
  require_dim(y.cols() == model.observation.obs_dim(), "observations have wrong dimension");
  const Eigen::Index nu = model.features->input_dim();
  if (nu > 0) require_dim(u.rows() >= T && u.cols() == nu, "inputs must be T x n_u");
  if (reference) {
    require_dim(reference->rows() == T && reference->cols() == nx,
                "reference trajectory must be T x n_x");
  }

  const Matrix Lq = robust_cholesky(model.Q, "process noise Q");
  const Matrix Lr = robust_cholesky(model.observation.R, "measurement noise R");
  const Matrix L1 = noise_factor(model.x1.cov, "initial state covariance");
  const double obs_const =
      -0.5 * (static_cast<double>(y.cols()) * kLog2Pi + log_det_from_cholesky(Lr));

  const int free_count = reference ? N - 1 : N;
  ParticleSystem ps;
  ps.particles.assign(static_cast<std::size_t>(T), RowMatrix(N, nx));
  ps.log_weights.resize(T, N);
  ps.ancestors.resize(std::max<Eigen::Index>(T - 1, 0), N);

  RowMatrix& x1 = ps.particles[0];
  for (int i = 0; i < free_count; ++i)
    x1.row(i) = (model.x1.mean + L1 * rng.normal_vector(nx)).transpose();
  if (reference) x1.row(N - 1) = reference->row(0);

  PgasResult result;
  const Eigen::Index m = model.features->size();
  RowMatrix Z(N, m);
  RowMatrix means(N, nx);
  Vector z(m);
  for (Eigen::Index t = 0; t < T; ++t) {
    const RowMatrix& xt = ps.particles[static_cast<std::size_t>(t)];
    const Vector yt = y.row(t).transpose();
    for (int i = 0; i < N; ++i) {
      const Vector xi = xt.row(i).transpose();
      if (!model.features->in_domain(xi)) ++result.out_of_domain;
      const Vector r = Lr.triangularView<Eigen::Lower>().solve(yt - model.observation.mean(xi));
      ps.log_weights(t, i) = obs_const - 0.5 * r.squaredNorm();
    }
    double log_sum = 0.0;
    Vector w;
    try {
      w = normalize_log_weights(ps.log_weights.row(t).transpose(), &log_sum);
    } catch (const NumericalError&) {
      throw NumericalError("particle weights collapsed (all zero) at t = " + std::to_string(t + 1));
    }
    result.log_likelihood += log_sum - std::log(static_cast<double>(N));
    if (t + 1 == T) break;

    const RowMatrix ut = input_row_or_empty(u, t);
    for (int i = 0; i < N; ++i) {
      model.features->evaluate(xt.row(i).transpose(), ut.row(0).transpose(), z);
      Z.row(i) = z.transpose();
    }
    means.noalias() = Z * model.A.transpose();

    RowMatrix& xnext = ps.particles[static_cast<std::size_t>(t + 1)];
    std::vector<int> parents;
    if (reference) {
      xnext.row(N - 1) = reference->row(t + 1);
      Vector log_anc(N);
      const Vector target = reference->row(t + 1).transpose();
      for (int j = 0; j < N; ++j) {
        const Vector r =
            Lq.triangularView<Eigen::Lower>().solve(target - means.row(j).transpose());
        log_anc[j] = ps.log_weights(t, j) - 0.5 * r.squaredNorm();
      }
      const int b = sample_log_categorical(log_anc, rng);
      ps.ancestors(t, N - 1) = b;
      parents = conditional_systematic_resample(w, N, b, rng);
    } else {
      parents = systematic_resample(w, N, rng);
    }
    for (int i = 0; i < free_count; ++i) {
      ps.ancestors(t, i) = parents[static_cast<std::size_t>(i)];
      xnext.row(i) = means.row(parents[static_cast<std::size_t>(i)]) +
                     (Lq * rng.normal_vector(nx)).transpose();
    }
  }

  result.final_index = sample_log_categorical(ps.log_weights.row(T - 1).transpose(), rng);
  result.states = ps.trace(result.final_index);
  if (out) *out = std::move(ps);
  return result;
}

}  // namespace

RowMatrix ParticleSystem::trace(Eigen::Index final_index) const {
  const Eigen::Index T = length();
  const Eigen::Index nx = particles.front().cols();
  RowMatrix path(T, nx);
  Eigen::Index i = final_index;
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    path.row(t) = particles[static_cast<std::size_t>(t)].row(i);
    if (t > 0) i = ancestors(t - 1, i);
  }
  return path;
}

PgasResult pgas_kernel(const RRGPSSM& model, const RowMatrix& reference,
                       const RowMatrix& observations, const RowMatrix& inputs, int particles,
                       Rng& rng, ParticleSystem* system) {
  return run_filter(model, &reference, observations, inputs, particles, rng, system);
}

PgasResult bootstrap_trajectory(const RRGPSSM& model, const RowMatrix& observations,
                                const RowMatrix& inputs, int particles, Rng& rng,
                                ParticleSystem* system) {
  return run_filter(model, nullptr, observations, inputs, particles, rng, system);
}

std::vector<int> systematic_resample(const Vector& weights, int count, Rng& rng) {
  std::vector<int> out(static_cast<std::size_t>(count));
  if (count == 0) return out;
  const double step = 1.0 / count;
  double position = rng.uniform() * step;
  double cumulative = weights[0];
  Eigen::Index j = 0;
  const Eigen::Index last = weights.size() - 1;
  for (int k = 0; k < count; ++k) {
    while (position > cumulative && j < last) cumulative += weights[++j];
    out[static_cast<std::size_t>(k)] = static_cast<int>(j);
    position += step;
  }
  return out;
}

Vector normalize_log_weights(const Vector& log_weights, double* log_sum) {
  const double mx = log_weights.maxCoeff();
  if (!std::isfinite(mx)) {
    if (mx == std::numeric_limits<double>::infinity())
      throw NumericalError("log weight is +inf");
    throw NumericalError("all weights are zero");
  }
  Vector w = (log_weights.array() - mx).exp();
  const double s = w.sum();
  if (log_sum) *log_sum = mx + std::log(s);
  return w / s;
}

std::vector<int> conditional_systematic_resample(const Vector& weights, int count, int fixed,
                                                 Rng& rng) {
  const auto n = static_cast<int>(weights.size());
  if (count < 1) throw std::invalid_argument("resample count must be >= 1");
  if (fixed < 0 || fixed >= n || !(weights[fixed] > 0.0))
    throw std::invalid_argument("conditioning index must have positive weight");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());

  std::vector<double> cumulative(static_cast<std::size_t>(n));
  double total = 0.0;
  int slot_of_fixed = 0;
  for (int k = 0; k < n; ++k) {
    total += weights[order[static_cast<std::size_t>(k)]];
    cumulative[static_cast<std::size_t>(k)] = total;
    if (order[static_cast<std::size_t>(k)] == fixed) slot_of_fixed = k;
  }
  // A position inside the fixed index's interval determines both the stratum
  // it occupies and the common offset.
  const double hi = cumulative[static_cast<std::size_t>(slot_of_fixed)];
  const double lo = hi - weights[fixed];
  const double s = std::clamp((lo + rng.uniform() * (hi - lo)) / total, 0.0, std::nextafter(1.0, 0.0));
  const int stratum = std::min(static_cast<int>(std::floor(count * s)), count - 1);
  const double offset = count * s - stratum;

  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count - 1));
  int k = 0;
  for (int j = 0; j < count; ++j) {
    const double position = (j + offset) / count * total;
    while (position > cumulative[static_cast<std::size_t>(k)] && k < n - 1) ++k;
    if (j != stratum) out.push_back(order[static_cast<std::size_t>(k)]);
  }
  std::shuffle(out.begin(), out.end(), rng.engine());
  return out;
}

int sample_log_categorical(const Vector& log_weights, Rng& rng) {
  const Vector w = normalize_log_weights(log_weights);
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    cumulative += w[i];
    if (u < cumulative) return static_cast<int>(i);
  }
  // Rounding left the cumulative sum just below 1: take the last positive weight.
  for (Eigen::Index i = w.size() - 1; i >= 0; --i)
    if (w[i] > 0.0) return static_cast<int>(i);
  return static_cast<int>(w.size() - 1);
}

}  // namespace rrgp
