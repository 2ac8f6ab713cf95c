#include "oracles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace oracle {

namespace {

constexpr double kPi = std::numbers::pi;

double log_normal(double x, double m, double v) {
  return -0.5 * std::log(2.0 * kPi * v) - 0.5 * (x - m) * (x - m) / v;
}

}  // namespace

KalmanResult kalman_smoother(const ScalarLgssm& m, const std::vector<double>& y) {
  const std::size_t T = y.size();
  KalmanResult k;
  k.filt_mean.resize(T);
  k.filt_var.resize(T);
  std::vector<double> pm(T), pv(T);
  double mp = m.m1, vp = m.p1;
  for (std::size_t t = 0; t < T; ++t) {
    pm[t] = mp;
    pv[t] = vp;
    const double s = m.c * m.c * vp + m.r;
    k.loglik += log_normal(y[t], m.c * mp, s);
    const double gain = vp * m.c / s;
    k.filt_mean[t] = mp + gain * (y[t] - m.c * mp);
    k.filt_var[t] = (1.0 - gain * m.c) * vp;
    mp = m.a * k.filt_mean[t];
    vp = m.a * m.a * k.filt_var[t] + m.q;
  }
  k.smooth_mean = k.filt_mean;
  k.smooth_var = k.filt_var;
  for (std::size_t t = T - 1; t-- > 0;) {
    const double J = k.filt_var[t] * m.a / pv[t + 1];
    k.smooth_mean[t] = k.filt_mean[t] + J * (k.smooth_mean[t + 1] - pm[t + 1]);
    k.smooth_var[t] = k.filt_var[t] + J * J * (k.smooth_var[t + 1] - pv[t + 1]);
  }
  return k;
}

std::pair<double, double> kalman_forecast(const ScalarLgssm& m, const std::vector<double>& y, int k) {
  const KalmanResult f = kalman_smoother(m, y);
  double mu = f.filt_mean.back(), v = f.filt_var.back();
  for (int h = 0; h < k; ++h) {
    mu = m.a * mu;
    v = m.a * m.a * v + m.q;
  }
  return {m.c * mu, m.c * m.c * v + m.r};
}

Quadrature gauss_legendre(int n, double a, double b) {
  Quadrature q;
  q.nodes.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    q.nodes[lo] = 0.5 * (a + b) - 0.5 * (b - a) * x;
    q.nodes[hi] = 0.5 * (a + b) + 0.5 * (b - a) * x;
    q.weights[lo] = q.weights[hi] = 0.5 * (b - a) * w;
  }
  return q;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double batch_means_se(const std::vector<double>& series, int batches) {
  const std::size_t b = series.size() / static_cast<std::size_t>(batches);
  if (b < 2) throw std::invalid_argument("series too short for batch means");
  std::vector<double> means;
  for (int k = 0; k < batches; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < b; ++i) s += series[static_cast<std::size_t>(k) * b + i];
    means.push_back(s / static_cast<double>(b));
  }
  return std::sqrt(variance(means) / batches);
}

GridPosterior scalar_grid_posterior(const std::vector<double>& y, double c, double r, double m1,
                                    double p1, double v, double dof, double scale, int grid) {
  const double alpha = dof / 2.0, beta = scale / 2.0;
  const auto log_joint = [&](double a, double lq) {
    const double q = std::exp(lq);
    const double log_ig = alpha * std::log(beta) - std::lgamma(alpha) - (alpha + 1.0) * lq - beta / q;
    ScalarLgssm m{a, q, c, r, m1, p1};
    return log_normal(a, 0.0, q / v) + log_ig + lq + kalman_smoother(m, y).loglik;
  };

  double a_lo = -3.0, a_hi = 3.0, l_lo = -8.0, l_hi = 4.0;
  GridPosterior out;
  for (int pass = 0; pass < 2; ++pass) {
    const int n = pass == 0 ? 80 : grid;
    const double da = (a_hi - a_lo) / n, dl = (l_hi - l_lo) / n;
    std::vector<double> lw(static_cast<std::size_t>(n * n));
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double val = log_joint(a_lo + (i + 0.5) * da, l_lo + (j + 0.5) * dl);
        lw[static_cast<std::size_t>(i * n + j)] = val;
        mx = std::max(mx, val);
      }
    double Z = 0, sa = 0, saa = 0, sq = 0, sqq = 0;
    const std::size_t T = y.size();
    std::vector<double> sx(T, 0.0), sxx(T, 0.0);
    double sl = 0, sll = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double w = std::exp(lw[static_cast<std::size_t>(i * n + j)] - mx);
        if (w < 1e-14) continue;
        const double a = a_lo + (i + 0.5) * da, lq = l_lo + (j + 0.5) * dl, q = std::exp(lq);
        Z += w;
        sa += w * a;
        saa += w * a * a;
        sq += w * q;
        sqq += w * q * q;
        sl += w * lq;
        sll += w * lq * lq;
        if (pass == 1) {
          const KalmanResult k = kalman_smoother(ScalarLgssm{a, q, c, r, m1, p1}, y);
          for (std::size_t t = 0; t < T; ++t) {
            sx[t] += w * k.smooth_mean[t];
            sxx[t] += w * (k.smooth_var[t] + k.smooth_mean[t] * k.smooth_mean[t]);
          }
        }
      }
    out.mean_a = sa / Z;
    out.var_a = saa / Z - out.mean_a * out.mean_a;
    out.mean_q = sq / Z;
    out.var_q = sqq / Z - out.mean_q * out.mean_q;
    const double ml = sl / Z, sdl = std::sqrt(sll / Z - ml * ml), sda = std::sqrt(out.var_a);
    if (pass == 0) {
      a_lo = out.mean_a - 9.0 * sda;
      a_hi = out.mean_a + 9.0 * sda;
      l_lo = ml - 9.0 * sdl;
      l_hi = ml + 9.0 * sdl;
    } else {
      out.mean_x.resize(T);
      out.var_x.resize(T);
      for (std::size_t t = 0; t < T; ++t) {
        out.mean_x[t] = sx[t] / Z;
        out.var_x[t] = sxx[t] / Z - out.mean_x[t] * out.mean_x[t];
      }
    }
  }
  return out;
}

double scalar_mniw_evidence(const std::vector<double>& targets,
                            const std::vector<std::vector<double>>& features,
                            const std::vector<double>& v, double dof, double scale) {
  const auto n = static_cast<Eigen::Index>(targets.size());
  const auto m = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd Z(n, m);
  for (Eigen::Index t = 0; t < n; ++t)
    for (Eigen::Index j = 0; j < m; ++j) Z(t, j) = features[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
  Eigen::VectorXd inv_v(m);
  for (Eigen::Index j = 0; j < m; ++j) inv_v[j] = 1.0 / v[static_cast<std::size_t>(j)];
  const Eigen::MatrixXd K =
      Eigen::MatrixXd::Identity(n, n) + Z * inv_v.asDiagonal() * Z.transpose();
  const Eigen::LLT<Eigen::MatrixXd> llt(K);
  const Eigen::VectorXd zeta = Eigen::Map<const Eigen::VectorXd>(targets.data(), n);
  const double quad = zeta.dot(llt.solve(zeta));
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double alpha = dof / 2.0, beta = scale / 2.0, nn = static_cast<double>(n);
  return std::lgamma(alpha + nn / 2.0) - std::lgamma(alpha) + alpha * std::log(beta) -
         0.5 * nn * std::log(2.0 * kPi) - 0.5 * logdet -
         (alpha + nn / 2.0) * std::log(beta + 0.5 * quad);
}

std::pair<double, double> moments_by_quadrature(const std::function<double(double)>& log_density,
                                                double lo, double hi, int n) {
  const Quadrature q = gauss_legendre(n, lo, hi);
  std::vector<double> lp(q.nodes.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lp.size(); ++i) {
    lp[i] = log_density(q.nodes[i]);
    mx = std::max(mx, lp[i]);
  }
  double Z = 0, s1 = 0, s2 = 0;
  for (std::size_t i = 0; i < lp.size(); ++i) {
    const double w = q.weights[i] * std::exp(lp[i] - mx);
    Z += w;
    s1 += w * q.nodes[i];
    s2 += w * q.nodes[i] * q.nodes[i];
  }
  const double m = s1 / Z;
  return {m, s2 / Z - m * m};
}

}  // namespace oracle
