#pragma once

// Reference computations used by the tests. They are written against plain
// std::vector / scalar formulas and share no code with the library.

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

/// x_{t+1} = a x_t + w,  w ~ N(0, q);  y_t = c x_t + e,  e ~ N(0, r);  x_1 ~ N(m1, p1).
struct ScalarLgssm {
  double a = 0.0, q = 1.0, c = 1.0, r = 1.0, m1 = 0.0, p1 = 1.0;
};

struct KalmanResult {
  std::vector<double> filt_mean, filt_var;
  std::vector<double> smooth_mean, smooth_var;
  double loglik = 0.0;
};

/// Kalman filter plus Rauch-Tung-Striebel smoother.
KalmanResult kalman_smoother(const ScalarLgssm& m, const std::vector<double>& y);

/// Mean and variance of y_{T+k} given y_{1:T}.
std::pair<double, double> kalman_forecast(const ScalarLgssm& m, const std::vector<double>& y, int k);

/// n-point Gauss-Legendre rule on [a, b].
struct Quadrature {
  std::vector<double> nodes, weights;
};
Quadrature gauss_legendre(int n, double a, double b);

/// Standard error of the mean of a correlated series by non-overlapping batch means.
double batch_means_se(const std::vector<double>& series, int batches = 40);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);

/// Posterior of (a, q) and of the smoothed states for the scalar model with
/// unknown a, q under a ~ N(0, q / v), q ~ IW(dof, scale) (inverse gamma with
/// shape dof/2 and scale scale/2), obtained by quadrature on a grid over
/// (a, log q) with the Kalman likelihood.
struct GridPosterior {
  double mean_a = 0, var_a = 0, mean_q = 0, var_q = 0;
  std::vector<double> mean_x, var_x;
};
GridPosterior scalar_grid_posterior(const std::vector<double>& y, double c, double r, double m1,
                                    double p1, double v, double dof, double scale, int grid = 240);

/// log p(x_{2:T} | x_{1:T-1}) with A ~ MN(0, Q, diag(v)) and Q ~ IW(dof, scale)
/// integrated out, for a scalar state with features z_t (m-vectors).
double scalar_mniw_evidence(const std::vector<double>& targets,
                            const std::vector<std::vector<double>>& features,
                            const std::vector<double>& v, double dof, double scale);

/// Mean and variance of a density known up to a constant on [lo, hi] by
/// Gauss-Legendre quadrature of exp(log_density).
std::pair<double, double> moments_by_quadrature(const std::function<double(double)>& log_density,
                                                double lo, double hi, int n = 2000);

}  // namespace oracle
