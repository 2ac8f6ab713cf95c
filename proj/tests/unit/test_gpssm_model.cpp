#include "rrgp/distributions.hpp"
#include "rrgp/features.hpp"
#include "rrgp/linalg.hpp"
#include "rrgp/model.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace rrgp;
using doctest::Approx;

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

Vector v1(double a) { return Vector::Constant(1, a); }
Matrix m1(double a) { return Matrix::Constant(1, 1, a); }

KernelSpec se1() { return KernelSpec{KernelFamily::SquaredExponential, 1.0, {1.0}, 1.5}; }

FeatureMapPtr hilbert1(int m, double L = 4.0) {
  return std::make_shared<HilbertFeatures>(BasisConfig::tensor_grid(Domain({L}), {m}, se1()));
}

RRGPSSM scalar_model(const FeatureMapPtr& f, const Matrix& A, double q, double r) {
  return RRGPSSM{f, A, m1(q), ObservationModel{m1(1.0), m1(r), nullptr}, GaussianInit::standard(1)};
}

double normal_logpdf(double x, double m, double v) {
  return -0.5 * std::log(2.0 * std::numbers::pi * v) - 0.5 * (x - m) * (x - m) / v;
}

Matrix spd2(double a, double b, double c) {
  Matrix S(2, 2);
  S << a, b, b, c;
  return S;
}

}  // namespace

TEST_SUITE("gpssm_model") {
  TEST_CASE("transition mean") {
    const auto f = hilbert1(3);
    CHECK(transition_mean(scalar_model(f, Matrix::Zero(1, 3), 1, 1), v1(0.7)).norm() == 0.0);
    CHECK(transition_mean(scalar_model(hilbert1(1), m1(2.0), 1, 1), v1(0.0))[0] == Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(transition_mean(scalar_model(f, Matrix::Zero(1, 2), 1, 1), v1(0.0)), DimensionError);
  }

  TEST_CASE("input term vanishes on the input-domain boundary") {
    BasisConfig state = BasisConfig::tensor_grid(Domain({4.0}), {3}, se1());
    BasisConfig input = BasisConfig::tensor_grid(Domain({2.0}), {4}, se1());
    auto f = std::make_shared<HilbertFeatures>(state, input);
    REQUIRE(f->size() == 7);
    REQUIRE(f->input_dim() == 1);
    Matrix A(1, 7);
    A << 0.3, -0.2, 0.5, 1.0, 2.0, -1.5, 0.7;
    Matrix A_state = A;
    A_state.rightCols(4).setZero();
    const RRGPSSM with_u = scalar_model(f, A, 1, 1);
    const RRGPSSM without_u = scalar_model(f, A_state, 1, 1);
    for (double u : {-2.0, 2.0})
      CHECK(transition_mean(with_u, v1(0.4), v1(u))[0] ==
            Approx(transition_mean(without_u, v1(0.4), v1(u))[0]).epsilon(1e-12));
    CHECK(transition_mean(with_u, v1(0.4), v1(0.3))[0] != Approx(transition_mean(without_u, v1(0.4), v1(0.3))[0]));
  }

  TEST_CASE("noise-free simulation stays at zero") {
    RRGPSSM m = scalar_model(hilbert1(4), Matrix::Zero(1, 4), 0.0, 0.0);
    m.x1 = GaussianInit{Vector::Zero(1), Matrix::Zero(1, 1)};
    Rng rng(3);
    const Trajectory tr = simulate(m, 25, rng);
    CHECK(tr.states.cwiseAbs().maxCoeff() == 0.0);
    CHECK(tr.observations.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("simulation is reproducible and validates its inputs") {
    Matrix A(1, 5);
    A << 0.5, -0.3, 0.2, 0.1, -0.05;
    const RRGPSSM m = scalar_model(hilbert1(5), A, 0.2, 0.1);
    Rng a(42), b(42), c(43);
    const Trajectory ta = simulate(m, 60, a), tb = simulate(m, 60, b), tc = simulate(m, 60, c);
    CHECK((ta.states.array() == tb.states.array()).all());
    CHECK((ta.observations.array() == tb.observations.array()).all());
    CHECK((ta.states.array() != tc.states.array()).any());
    CHECK_THROWS_AS(simulate(m, 0, a), std::invalid_argument);
    RRGPSSM bad = m;
    bad.Q = m1(-1.0);
    CHECK_THROWS_AS(simulate(bad, 5, a), NumericalError);
  }

  TEST_CASE("observation log-likelihood") {
    const RRGPSSM m = scalar_model(hilbert1(2), Matrix::Zero(1, 2), 1.0, 1.0);
    CHECK(obs_loglik(m, v1(0.3), v1(0.3)) == Approx(-kHalfLog2Pi).epsilon(1e-14));
    double previous = obs_loglik(m, v1(0.0), v1(0.0));
    for (double d = 0.25; d < 5.0; d += 0.25) {
      const double now = obs_loglik(m, v1(0.0), v1(d));
      CHECK(now < previous);
      previous = now;
    }
    RRGPSSM scaled = m;
    scaled.observation.R = m1(3.0);
    CHECK(obs_loglik(scaled, v1(0.3), v1(0.3)) - obs_loglik(m, v1(0.3), v1(0.3)) ==
          Approx(-0.5 * std::log(3.0)).epsilon(1e-13));
    RRGPSSM bad = m;
    bad.observation.R = m1(-2.0);
    CHECK_THROWS_AS(obs_loglik(bad, v1(0.0), v1(0.0)), NumericalError);

    // Two outputs with R = c I shift by -n_y/2 log c.
    RRGPSSM two = m;
    two.observation.C = Matrix::Ones(2, 1);
    two.observation.R = Matrix::Identity(2, 2);
    RRGPSSM two_scaled = two;
    two_scaled.observation.R = 2.5 * Matrix::Identity(2, 2);
    const Vector y = Vector::Constant(2, 0.1);
    CHECK(obs_loglik(two_scaled, v1(0.1), y) - obs_loglik(two, v1(0.1), y) == Approx(-std::log(2.5)).epsilon(1e-13));
  }

  TEST_CASE("matrix-normal log density") {
    CHECK(mn_logpdf(m1(0.0), m1(0.0), m1(1.0), m1(1.0)) == Approx(-kHalfLog2Pi).epsilon(1e-14));
    Matrix M(2, 3), A(2, 3), V(3, 3);
    M << 0.1, -0.2, 0.3, 0.0, 0.5, -1.0;
    A << 0.4, 0.1, -0.2, 1.0, 0.3, 0.2;
    V << 2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 0.5;
    const Matrix Q = spd2(1.5, 0.4, 0.8);
    CHECK(mn_logpdf(A, M, Q, V) == Approx(-7.699479786337143).epsilon(1e-12));
    CHECK(mn_logpdf(A, M, Q, V) == Approx(mn_logpdf(M, A, Q, V)).epsilon(1e-14));

    // Diagonal Q and V factorize into independent scalar normals with
    // variance Q_ii / V_jj.
    const Vector q = (Vector(2) << 0.7, 2.0).finished();
    const Vector v = (Vector(3) << 0.5, 1.5, 4.0).finished();
    double sum = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j) sum += normal_logpdf(A(i, j), M(i, j), q[i] / v[j]);
    CHECK(mn_logpdf(A, M, Matrix(q.asDiagonal()), Matrix(v.asDiagonal())) == Approx(sum).epsilon(1e-13));
    CHECK_THROWS_AS(mn_logpdf(A, M, Q, Matrix::Identity(2, 2)), DimensionError);
    CHECK_THROWS_AS(mn_logpdf(A, M, spd2(1.0, 2.0, 1.0), V), NumericalError);
  }

  TEST_CASE("Gaussian helpers") {
    const Vector mu = (Vector(2) << 0.3, -1.0).finished();
    const Vector x = (Vector(2) << 1.1, 0.2).finished();
    CHECK(mvn_logpdf(x, mu, spd2(1.5, 0.4, 0.8)) == Approx(-2.7728720383706014).epsilon(1e-13));
    CHECK(log_multivariate_gamma(3, 3.7) == Approx(4.465392536249502).epsilon(1e-13));
    CHECK(log_multivariate_gamma(1, 2.5) == Approx(std::lgamma(2.5)).epsilon(1e-14));
  }

  TEST_CASE("inverse-Wishart log density") {
    CHECK(iw_logpdf(m1(1.0), 3.0, m1(1.0)) == Approx(-1.4189385332046727).epsilon(1e-13));
    CHECK(iw_logpdf(spd2(1.3, 0.2, 0.7), 5.5, spd2(2.0, -0.3, 1.5)) == Approx(-3.4497289319531905).epsilon(1e-12));
    CHECK_THROWS_AS(iw_logpdf(m1(1.0), 0.0, m1(1.0)), std::invalid_argument);
    CHECK_THROWS_AS(iw_logpdf(spd2(1.0, 0.0, 1.0), 1.0, spd2(1.0, 0.0, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(iw_logpdf(m1(-1.0), 3.0, m1(1.0)), NumericalError);
  }

  TEST_CASE("1-D inverse-Wishart integrates to one and peaks at Lambda / (l + 2)") {
    for (auto [dof, lam] : {std::pair{3.0, 1.0}, {10.0, 1.0}, {4.5, 2.7}}) {
      // Substitute q = exp(s).
      const auto quad = oracle::gauss_legendre(4000, -25.0, 25.0);
      double total = 0.0;
      for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
        const double q = std::exp(quad.nodes[i]);
        total += quad.weights[i] * std::exp(iw_logpdf(m1(q), dof, m1(lam))) * q;
      }
      CHECK(total == Approx(1.0).epsilon(1e-4));
      const double mode = lam / (dof + 2.0);
      const double h = 1e-4 * mode;
      CHECK(iw_logpdf(m1(mode), dof, m1(lam)) > iw_logpdf(m1(mode + h), dof, m1(lam)));
      CHECK(iw_logpdf(m1(mode), dof, m1(lam)) > iw_logpdf(m1(mode - h), dof, m1(lam)));
    }
  }

  TEST_CASE("sample_mn moments") {
    const Matrix M = (Matrix(2, 2) << 1.0, -0.5, 0.2, 2.0).finished();
    const Matrix Q = spd2(1.2, 0.3, 0.6);
    const Matrix V = spd2(2.0, -0.4, 0.9);
    const Matrix Vinv = V.inverse();
    Matrix cov_true(4, 4);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) cov_true.block(2 * a, 2 * b, 2, 2) = Vinv(a, b) * Q;
    Rng rng(11);
    const int n = 100000;
    std::vector<Vector> draws;
    Vector mean = Vector::Zero(4);
    for (int k = 0; k < n; ++k) {
      const Matrix A = sample_mn(M, Q, V, rng);
      const Vector vec = Eigen::Map<const Vector>(A.data(), 4);  // column-major vec
      draws.push_back(vec);
      mean += vec;
    }
    mean /= n;
    const Vector vecM = Eigen::Map<const Vector>(M.data(), 4);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(mean[i] - vecM[i]) < 3.0 * std::sqrt(cov_true(i, i) / n));
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) {
        double s = 0.0, s2 = 0.0;
        for (const Vector& d : draws) {
          const double p = (d[i] - vecM[i]) * (d[j] - vecM[j]);
          s += p;
          s2 += p * p;
        }
        const double c = s / n;
        const double se = std::sqrt((s2 / n - c * c) / n);
        CHECK(std::abs(c - cov_true(i, j)) < 3.0 * se);
      }
  }

  TEST_CASE("sample_mn with vanishing Q collapses on M") {
    Rng rng(5);
    const Matrix M = (Matrix(1, 3) << 0.1, 0.2, 0.3).finished();
    const double eps = 1e-12;
    for (int k = 0; k < 50; ++k)
      CHECK((sample_mn(M, m1(eps), Matrix::Identity(3, 3), rng) - M).cwiseAbs().maxCoeff() < 10.0 * std::sqrt(eps));
  }

  TEST_CASE("prior weight variances follow the spectral density times Q") {
    const BasisConfig b = BasisConfig::tensor_grid(Domain({4.0}), {4}, se1());
    const Vector V = prior_precision(b);
    const double q = 0.6;
    Rng rng(8);
    const int n = 100000;
    Vector s2 = Vector::Zero(4);
    for (int k = 0; k < n; ++k) s2 += sample_mn(Matrix::Zero(1, 4), m1(q), Matrix(V.asDiagonal()), rng).row(0).transpose().cwiseAbs2();
    for (int j = 0; j < 4; ++j) {
      const double expected = q * std::exp(b.log_spectral_weights()[j]);
      CHECK(std::abs(s2[j] / n - expected) < 3.0 * std::sqrt(2.0 / n) * expected);
    }
  }

  TEST_CASE("mn_logpdf and sample_mn are consistent (importance weights average one)") {
    const Matrix M = (Matrix(1, 2) << 0.3, -0.1).finished();
    const Matrix V = spd2(1.5, 0.2, 0.8);
    const Matrix M2 = (Matrix(1, 2) << 0.5, 0.1).finished();
    const Matrix V2 = spd2(3.0, 0.1, 2.0);
    Rng rng(21);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const Matrix A = sample_mn(M, m1(1.0), V, rng);
      const double w = std::exp(mn_logpdf(A, M2, m1(1.0), V2) - mn_logpdf(A, M, m1(1.0), V));
      s += w;
      s2 += w * w;
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - 1.0) < 3.0 * se);
  }

  TEST_CASE("sample_iw") {
    // 1-D: Lambda / chi-square(l) on the same random stream.
    Rng a(9), b(9);
    for (int k = 0; k < 100; ++k) CHECK(sample_iw(6.0, m1(2.0), a)(0, 0) == Approx(2.0 / b.chi_squared(6.0)).epsilon(1e-14));

    Rng rng(13);
    const int n = 100000;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double q = sample_iw(10.0, m1(1.0), rng)(0, 0);
      s += q;
      s2 += q * q;
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - 0.125) < 3.0 * se);

    const Matrix Lam = spd2(2.0, 0.5, 1.0);
    Matrix acc = Matrix::Zero(2, 2);
    for (int k = 0; k < 20000; ++k) {
      const Matrix Q = sample_iw(7.0, Lam, rng);
      CHECK_FALSE(Q.llt().info() != Eigen::Success);
      acc += Q;
    }
    CHECK(((acc / 20000.0) - Lam / (7.0 - 3.0)).cwiseAbs().maxCoeff() < 0.02);
    CHECK_THROWS_AS(sample_iw(0.5, Lam, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_iw(5.0, spd2(1.0, 2.0, 1.0), rng), NumericalError);
  }

  TEST_CASE("prior specification") {
    PriorSpec p = PriorSpec::defaults(2, 3);
    CHECK(p.q_dof == 10.0);
    CHECK(p.q_scale.isIdentity());
    CHECK(p.theta_std.isConstant(2.0));
    const Vector t = (Vector(3) << 0.1, -0.5, 1.0).finished();
    CHECK(p.log_theta_prior(t) ==
          Approx(normal_logpdf(0.1, 0, 4) + normal_logpdf(-0.5, 0, 4) + normal_logpdf(1.0, 0, 4)).epsilon(1e-14));
    p.q_dof = 1.0;
    CHECK_THROWS_AS(p.validate(2, 3), std::invalid_argument);
    p.q_dof = 10.0;
    CHECK_THROWS_AS(p.validate(2, 2), DimensionError);
    p.q_scale = spd2(1.0, 2.0, 1.0);
    CHECK_THROWS(p.validate(2, 3));
  }

  TEST_CASE("model validation") {
    RRGPSSM m = scalar_model(hilbert1(3), Matrix::Zero(1, 3), 1.0, 1.0);
    CHECK_NOTHROW(m.validate());
    m.A = Matrix::Zero(1, 2);
    CHECK_THROWS_AS(m.validate(), DimensionError);
    m.A = Matrix::Zero(1, 3);
    m.observation.C = Matrix::Ones(1, 2);
    CHECK_THROWS_AS(m.validate(), DimensionError);
  }

  TEST_CASE("Cholesky with jitter") {
    const Matrix S = spd2(4.0, 2.0, 3.0);
    const Matrix L = robust_cholesky(S, "S");
    CHECK((L * L.transpose() - S).cwiseAbs().maxCoeff() < 1e-14);
    const Matrix singular = spd2(1.0, 1.0, 1.0);
    const Matrix Ls = robust_cholesky(singular, "singular");
    CHECK((Ls * Ls.transpose() - singular).cwiseAbs().maxCoeff() < 1e-6);
    try {
      robust_cholesky(spd2(1.0, 3.0, 1.0), "Q");
      FAIL("expected failure");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("Q") != std::string::npos);
    }
    CHECK(log_det_from_cholesky(L) == Approx(std::log(8.0)).epsilon(1e-14));
    CHECK((spd_inverse_from_cholesky(L) * S - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    const Matrix T3 = (Matrix(3, 3) << 1, 2, 4, 2, 3, 5, 4, 5, 6).finished();
    CHECK(lower_triangle(T3) == (Vector(6) << 1, 2, 3, 4, 5, 6).finished());
    CHECK(from_lower_triangle(lower_triangle(T3), 3) == T3);
  }
}
