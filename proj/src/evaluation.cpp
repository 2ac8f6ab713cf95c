#include "rrgp/evaluation.hpp"

#include "rrgp/linalg.hpp"
#include "rrgp/pgas.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace rrgp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Welford accumulation of per-record means plus the average within-record
// variance.
class Pool {
 public:
  void add(const Matrix& mean, const Matrix& variance) {
    if (count_ == 0) {
      mean_ = Matrix::Zero(mean.rows(), mean.cols());
      m2_ = Matrix::Zero(mean.rows(), mean.cols());
      within_ = Matrix::Zero(mean.rows(), mean.cols());
    }
    require_dim(mean.rows() == mean_.rows() && mean.cols() == mean_.cols(),
                "record predictions differ in shape");
    ++count_;
    const Matrix delta = mean - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta.cwiseProduct(mean - mean_);
    within_ += (variance - within_) / static_cast<double>(count_);
  }

  PredictiveSummary summary(std::size_t samples) const {
    PredictiveSummary s;
    s.mean = mean_;
    s.variance = within_ + m2_ / static_cast<double>(count_);
    s.samples = samples;
    return s;
  }

 private:
  std::size_t count_ = 0;
  Matrix mean_, m2_, within_;
};

void require_records(std::span<const ChainRecord> records) {
  if (records.empty()) throw std::invalid_argument("empty chain slice: nothing to predict with");
}

Vector input_at(const RowMatrix& inputs, Eigen::Index t) {
  if (inputs.cols() == 0) return Vector();
  require_dim(t < inputs.rows(), "inputs do not cover the prediction horizon");
  return inputs.row(t).transpose();
}

// Draw-based within-record moments from a set of draws (rows).
void moments(const RowMatrix& draws, Matrix& mean, Matrix& var, Eigen::Index t) {
  const Eigen::RowVectorXd m = draws.colwise().mean();
  mean.row(t) = m;
  var.row(t) = (draws.rowwise() - m).array().square().colwise().mean();
}

PredictiveSummary one_step(std::span<const ChainRecord> records, const ModelStructure& structure,
                           const RowMatrix& states, const RowMatrix& inputs,
                           PredictionTarget target, int S, Rng& rng) {
  const FeatureMap& features = *structure.features;
  const Eigen::Index Te = states.rows();
  if (Te < 2) throw std::invalid_argument("one-step prediction needs at least two states");
  require_dim(states.cols() == features.state_dim(), "states have wrong dimension");
  RowMatrix Z(Te - 1, features.size());
  Vector z(features.size());
  for (Eigen::Index t = 0; t + 1 < Te; ++t) {
    features.evaluate(states.row(t).transpose(), input_at(inputs, t), z);
    Z.row(t) = z.transpose();
  }

  Pool pool;
  for (const ChainRecord& rec : records) {
    const RRGPSSM model = model_from_record(structure, rec);
    const Matrix state_mean = Z * rec.A.transpose();  // (Te-1) x n_x
    if (S == 0) {
      if (target == PredictionTarget::State) {
        const Matrix var = Vector(rec.Q.diagonal()).transpose().replicate(Te - 1, 1);
        pool.add(state_mean, var);
      } else {
        if (model.observation.features)
          throw std::invalid_argument(
              "closed-form observation prediction needs a linear observation map; use samples");
        const Matrix& C = model.observation.C;
        const Vector v = (C * rec.Q * C.transpose() + model.observation.R).diagonal();
        pool.add(state_mean * C.transpose(), v.transpose().replicate(Te - 1, 1));
      }
      continue;
    }
    const Matrix Lq = noise_factor(rec.Q, "process noise Q");
    const Matrix Lr = noise_factor(model.observation.R, "measurement noise R");
    const Eigen::Index n =
        target == PredictionTarget::State ? features.state_dim() : model.observation.obs_dim();
    Matrix mean(Te - 1, n), var(Te - 1, n);
    RowMatrix draws(S, n);
    for (Eigen::Index t = 0; t + 1 < Te; ++t) {
      for (int s = 0; s < S; ++s) {
        const Vector x = state_mean.row(t).transpose() + Lq * rng.normal_vector(Lq.rows());
        if (target == PredictionTarget::State)
          draws.row(s) = x.transpose();
        else
          draws.row(s) =
              (model.observation.mean(x) + Lr * rng.normal_vector(Lr.rows())).transpose();
      }
      moments(draws, mean, var, t);
    }
    pool.add(mean, var);
  }
  return pool.summary(S == 0 ? records.size() : records.size() * static_cast<std::size_t>(S));
}

PredictiveSummary free_run(std::span<const ChainRecord> records, const ModelStructure& structure,
                           const RowMatrix& states, const RowMatrix& inputs,
                           PredictionTarget target, int S, Rng& rng, Eigen::Index steps) {
  if (S < 1) throw std::invalid_argument("free-run prediction needs samples_per_record >= 1");
  const Eigen::Index Te = states.rows() > 0 ? states.rows() : steps;
  if (Te < 1) throw std::invalid_argument("free-run horizon must be >= 1");
  Pool pool;
  for (const ChainRecord& rec : records) {
    const RRGPSSM model = model_from_record(structure, rec);
    const Matrix Lq = noise_factor(rec.Q, "process noise Q");
    const Matrix Lr = noise_factor(model.observation.R, "measurement noise R");
    const Matrix L1 = noise_factor(model.x1.cov, "initial state covariance");
    const Eigen::Index nx = model.state_dim();
    const Eigen::Index n = target == PredictionTarget::State ? nx : model.observation.obs_dim();
    RowMatrix particles(S, nx);
    for (int s = 0; s < S; ++s) {
      if (states.rows() > 0)
        particles.row(s) = states.row(0);
      else
        particles.row(s) = (model.x1.mean + L1 * rng.normal_vector(nx)).transpose();
    }
    Matrix mean(Te, n), var(Te, n);
    RowMatrix draws(S, n);
    for (Eigen::Index t = 0; t < Te; ++t) {
      for (int s = 0; s < S; ++s) {
        const Vector x = particles.row(s).transpose();
        if (target == PredictionTarget::State)
          draws.row(s) = x.transpose();
        else
          draws.row(s) =
              (model.observation.mean(x) + Lr * rng.normal_vector(Lr.rows())).transpose();
      }
      moments(draws, mean, var, t);
      if (t + 1 == Te) break;
      const Vector u = input_at(inputs, t);
      for (int s = 0; s < S; ++s) {
        particles.row(s) = (transition_mean(model, particles.row(s).transpose(), u) +
                            Lq * rng.normal_vector(nx))
                               .transpose();
      }
    }
    pool.add(mean, var);
  }
  return pool.summary(records.size() * static_cast<std::size_t>(S));
}

// Bootstrap filter under one model. At each filter time in [first_time, last]
// the weighted particles are propagated k steps and `emit(t, mean, var)`
// receives the k x n_y predictive moments of y_{t+1..t+k}.
template <typename Emit>
void filter_and_predict(const RRGPSSM& model, const RowMatrix& y, const RowMatrix& inputs, int k,
                        int N, Rng& rng, Eigen::Index first_time, Emit&& emit) {
  model.validate();
  if (k < 1) throw std::invalid_argument("forecast horizon k must be >= 1");
  if (N < 1) throw std::invalid_argument("filter particle count must be >= 1");
  const Eigen::Index T = y.rows();
  const Eigen::Index nx = model.state_dim();
  const Eigen::Index ny = model.observation.obs_dim();
  require_dim(y.cols() == ny, "observations have wrong dimension");
  const Matrix Lq = noise_factor(model.Q, "process noise Q");
  const Matrix Lr = robust_cholesky(model.observation.R, "measurement noise R");
  const Matrix L1 = noise_factor(model.x1.cov, "initial state covariance");
  const Vector R_diag = model.observation.R.diagonal();

  RowMatrix particles(N, nx), next(N, nx);
  for (int i = 0; i < N; ++i) particles.row(i) = (model.x1.mean + L1 * rng.normal_vector(nx)).transpose();
  Vector logw(N);
  RowMatrix ahead(N, nx);
  RowMatrix gy(N, ny);
  for (Eigen::Index t = 0; t < T; ++t) {
    const Vector yt = y.row(t).transpose();
    for (int i = 0; i < N; ++i) {
      const Vector r = Lr.triangularView<Eigen::Lower>().solve(
          yt - model.observation.mean(particles.row(i).transpose()));
      logw[i] = -0.5 * r.squaredNorm();
    }
    Vector w;
    try {
      w = normalize_log_weights(logw);
    } catch (const NumericalError&) {
      throw NumericalError("forecast filter collapsed (all weights zero) at t = " +
                           std::to_string(t + 1));
    }

    if (t >= first_time) {
      Matrix mean(k, ny), var(k, ny);
      ahead = particles;
      for (int h = 0; h < k; ++h) {
        const Vector u = input_at(inputs, t + h);
        for (int i = 0; i < N; ++i) {
          ahead.row(i) = (transition_mean(model, ahead.row(i).transpose(), u) +
                          Lq * rng.normal_vector(nx))
                             .transpose();
          gy.row(i) = model.observation.mean(ahead.row(i).transpose()).transpose();
        }
        const Eigen::RowVectorXd m = w.transpose() * gy;
        mean.row(h) = m;
        var.row(h) = (w.transpose() * (gy.rowwise() - m).array().square().matrix()) +
                     R_diag.transpose();
      }
      emit(t, mean, var);
    }
    if (t + 1 == T) break;
    const std::vector<int> parents = systematic_resample(w, N, rng);
    const Vector u = input_at(inputs, t);
    for (int i = 0; i < N; ++i) {
      next.row(i) = (transition_mean(model, particles.row(parents[static_cast<std::size_t>(i)]).transpose(), u) +
                     Lq * rng.normal_vector(nx))
                        .transpose();
    }
    particles.swap(next);
  }
}

}  // namespace

std::string to_string(PredictionMode mode) {
  return mode == PredictionMode::OneStep ? "one_step" : "free_run";
}

std::string to_string(PredictionTarget target) {
  return target == PredictionTarget::State ? "state" : "observation";
}

PredictiveSummary posterior_predictive(std::span<const ChainRecord> records,
                                       const ModelStructure& structure, const RowMatrix& states,
                                       const RowMatrix& inputs, PredictionMode mode,
                                       PredictionTarget target, int samples_per_record, Rng& rng,
                                       Eigen::Index steps) {
  require_records(records);
  if (samples_per_record < 0) throw std::invalid_argument("samples per record must be >= 0");
  if (mode == PredictionMode::OneStep)
    return one_step(records, structure, states, inputs, target, samples_per_record, rng);
  return free_run(records, structure, states, inputs, target, samples_per_record, rng, steps);
}

double rmse(const PredictiveSummary& pred, const RowMatrix& y_eval) {
  require_dim(pred.mean.rows() == y_eval.rows() && pred.mean.cols() == y_eval.cols(),
              "prediction and evaluation data differ in shape");
  if (y_eval.rows() == 0) throw std::invalid_argument("empty evaluation data");
  return std::sqrt((pred.mean - Matrix(y_eval)).rowwise().squaredNorm().mean());
}

double mean_loglik(const PredictiveSummary& pred, const RowMatrix& y_eval) {
  require_dim(pred.mean.rows() == y_eval.rows() && pred.mean.cols() == y_eval.cols(),
              "prediction and evaluation data differ in shape");
  require_dim(pred.variance.rows() == pred.mean.rows() && pred.variance.cols() == pred.mean.cols(),
              "prediction variance has wrong shape");
  if (y_eval.rows() == 0) throw std::invalid_argument("empty evaluation data");
  const Eigen::ArrayXXd v = pred.variance.array().max(kVarianceFloor);
  const Eigen::ArrayXXd r2 = (pred.mean - Matrix(y_eval)).array().square();
  const Eigen::ArrayXXd terms = -0.5 * (kLog2Pi + v.log() + r2 / v);
  return terms.rowwise().sum().mean();
}

PredictiveSummary forecast_k_step(std::span<const ChainRecord> records,
                                  const ModelStructure& structure, const RowMatrix& y_history,
                                  const RowMatrix& inputs, int k, int filter_particles,
                                  Rng& rng) {
  require_records(records);
  const Eigen::Index T = y_history.rows();
  if (T < 1) throw std::invalid_argument("forecast needs a non-empty history");
  Pool pool;
  for (const ChainRecord& rec : records) {
    filter_and_predict(model_from_record(structure, rec), y_history, inputs, k, filter_particles,
                       rng, T - 1,
                       [&](Eigen::Index, const Matrix& mean, const Matrix& var) {
                         pool.add(mean, var);
                       });
  }
  return pool.summary(records.size() * static_cast<std::size_t>(filter_particles));
}

PredictiveSummary forecast_rolling(std::span<const ChainRecord> records,
                                   const ModelStructure& structure, const RowMatrix& y,
                                   const RowMatrix& inputs, int k, int filter_particles,
                                   Rng& rng) {
  require_records(records);
  const Eigen::Index T = y.rows();
  if (k < 1) throw std::invalid_argument("forecast horizon k must be >= 1");
  if (T <= k) throw std::invalid_argument("series is not longer than the forecast horizon");
  const Eigen::Index ny = y.cols();
  Pool pool;
  Matrix mean(T - k, ny), var(T - k, ny);
  for (const ChainRecord& rec : records) {
    const RowMatrix y_fit = y.topRows(T - k);
    filter_and_predict(model_from_record(structure, rec), y_fit, inputs, k, filter_particles, rng,
                       0, [&](Eigen::Index t, const Matrix& m, const Matrix& v) {
                         mean.row(t) = m.row(k - 1);
                         var.row(t) = v.row(k - 1);
                       });
    pool.add(mean, var);
  }
  return pool.summary(records.size() * static_cast<std::size_t>(filter_particles));
}

void write_predictive_csv(std::ostream& os, const PredictiveSummary& pred, long first_time) {
  const Eigen::Index n = pred.mean.cols();
  const auto suffix = [n](Eigen::Index j) {
    return n == 1 ? std::string() : "_" + std::to_string(j + 1);
  };
  os << "t";
  for (Eigen::Index j = 0; j < n; ++j)
    os << ",mean" << suffix(j) << ",var" << suffix(j) << ",lo95" << suffix(j) << ",hi95"
       << suffix(j);
  os << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index t = 0; t < pred.length(); ++t) {
    os << first_time + t;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double m = pred.mean(t, j);
      const double sd = std::sqrt(std::max(pred.variance(t, j), 0.0));
      os << ',' << m << ',' << pred.variance(t, j) << ',' << m - 1.959963984540054 * sd << ','
         << m + 1.959963984540054 * sd;
    }
    os << '\n';
  }
}

}  // namespace rrgp
