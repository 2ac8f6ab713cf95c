#include "rrgp/kernel_basis.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace rrgp;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

Vector v1(double a) { return Vector::Constant(1, a); }
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

KernelSpec se(double var, std::vector<double> ls) {
  return KernelSpec{KernelFamily::SquaredExponential, var, std::move(ls), 1.5};
}

KernelSpec matern(double var, double ls, double nu, std::size_t d = 1) {
  return KernelSpec{KernelFamily::Matern, var, std::vector<double>(d, ls), nu};
}

BasisConfig grid1(int m, double L = 4.0, KernelSpec k = se(1.0, {1.0})) {
  return BasisConfig::tensor_grid(Domain({L}), {m}, k);
}

// Independent SE covariance.
double se_kernel(double r2, double var, double ls) { return var * std::exp(-0.5 * r2 / (ls * ls)); }

}  // namespace

TEST_SUITE("kernel_basis") {
  TEST_CASE("eigenvalues follow (pi j / 2L)^2") {
    const Domain d1({4.0});
    CHECK(eigenvalue({{1}}, d1) == Approx(0.15421256876702122).epsilon(1e-14));
    CHECK(eigenvalue({{1, 1}}, Domain({4.0, 4.0})) == Approx(0.30842513753404244).epsilon(1e-14));
    CHECK(eigenvalue({{2}}, d1) == Approx(4.0 * eigenvalue({{1}}, d1)).epsilon(1e-14));
    for (int j = 1; j < 30; ++j) CHECK(eigenvalue({{j + 1}}, d1) > eigenvalue({{j}}, d1));
    CHECK(eigenvalue({{2, 1}}, Domain({4.0, 4.0})) > eigenvalue({{1, 1}}, Domain({4.0, 4.0})));
    CHECK(eigenfrequency({{3, 1}}, Domain({4.0, 2.0})).squaredNorm() ==
          Approx(eigenvalue({{3, 1}}, Domain({4.0, 2.0}))));
  }

  TEST_CASE("eigenvalue rejects dimension mismatch and invalid indices") {
    CHECK_THROWS_AS(eigenvalue({{1, 1}}, Domain({4.0})), DimensionError);
    CHECK_THROWS_AS(eigenvalue({{0}}, Domain({4.0})), std::invalid_argument);
    CHECK_THROWS_AS(Domain({0.0}), std::invalid_argument);
    CHECK_THROWS_AS(Domain({}), std::invalid_argument);
  }

  TEST_CASE("eigenfunction values") {
    const Domain d({4.0});
    CHECK(std::abs(eigenfunction({{1}}, d, v1(-4.0))) < 1e-15);
    CHECK(eigenfunction({{1}}, d, v1(0.0)) == Approx(0.5).epsilon(1e-15));
    CHECK(eigenfunction({{1, 1}}, Domain({4.0, 4.0}), v2(0.0, 0.0)) == Approx(0.25).epsilon(1e-15));
    // Outside the domain the sine formula is used unchanged.
    CHECK(eigenfunction({{1}}, d, v1(5.0)) == Approx(0.5 * std::sin(kPi * 9.0 / 8.0)).epsilon(1e-14));
    CHECK_THROWS_AS(eigenfunction({{1}}, d, v2(0.0, 0.0)), DimensionError);
  }

  TEST_CASE("basis vector examples") {
    const Vector p = basis_vector(grid1(2), v1(0.0));
    REQUIRE(p.size() == 2);
    CHECK(p[0] == Approx(0.5));
    CHECK(std::abs(p[1]) < 1e-15);
    CHECK(basis_vector(grid1(1), v1(0.0))[0] == Approx(0.5));
    const BasisConfig b2 = BasisConfig::tensor_grid(Domain({4.0, 2.0}), {3, 4}, se(1.0, {1.0, 1.0}));
    for (double sx : {-1.0, 1.0})
      for (double sy : {-1.0, 1.0}) CHECK(basis_vector(b2, v2(4.0 * sx, 2.0 * sy)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(basis_vector(b2, v1(0.0)), DimensionError);
  }

  TEST_CASE("basis vector matches eigenfunction in canonical order") {
    const BasisConfig b = BasisConfig::tensor_grid(Domain({4.0, 3.0}), {4, 3}, se(1.0, {1.0, 2.0}));
    const Vector x = v2(0.37, -1.2);
    const Vector p = basis_vector(b, x);
    for (std::size_t j = 0; j < b.size(); ++j)
      CHECK(p[static_cast<Eigen::Index>(j)] ==
            Approx(eigenfunction(b.indices()[j], b.domain(), x)).epsilon(1e-13));
  }

  TEST_CASE("canonical ordering: ascending eigenvalue, lexicographic ties") {
    const BasisConfig b = BasisConfig::tensor_grid(Domain({4.0, 4.0}), {2, 2}, se(1.0, {1.0, 1.0}));
    REQUIRE(b.size() == 4);
    CHECK(b.indices()[0].j == std::vector<int>{1, 1});
    CHECK(b.indices()[1].j == std::vector<int>{1, 2});
    CHECK(b.indices()[2].j == std::vector<int>{2, 1});
    CHECK(b.indices()[3].j == std::vector<int>{2, 2});
    const BasisConfig shuffled(Domain({4.0, 4.0}), {{{2, 2}}, {{2, 1}}, {{1, 1}}, {{1, 2}}},
                               se(1.0, {1.0, 1.0}));
    CHECK(shuffled.indices() == b.indices());
    for (std::size_t j = 1; j < b.size(); ++j)
      CHECK(b.eigenvalues()[static_cast<Eigen::Index>(j)] >= b.eigenvalues()[static_cast<Eigen::Index>(j - 1)]);
    CHECK_THROWS_AS(BasisConfig(Domain({4.0}), {{{1}}, {{1}}}, se(1.0, {1.0})), std::invalid_argument);
    CHECK_THROWS_AS(BasisConfig(Domain({4.0}), {{{1, 1}}}, se(1.0, {1.0})), DimensionError);
  }

  TEST_CASE("spectral density examples") {
    CHECK(spectral_density(se(1.0, {1.0}), v1(0.0)) == Approx(std::sqrt(2.0 * kPi)).epsilon(1e-14));
    CHECK(spectral_density(se(1.0, {1.0}), v1(60.0)) < 1e-300);
    CHECK(spectral_density(matern(1.0, 1.0, 0.5), v1(0.0)) == Approx(2.0).epsilon(1e-13));
    CHECK(spectral_density(se(1.7, {0.8, 1.9}), v2(0.7, -1.2)) == Approx(1.0317079701253078).epsilon(1e-13));
    CHECK(spectral_density(matern(1.3, 0.7, 1.5), v1(0.9)) == Approx(1.6391463903428853).epsilon(1e-13));
    CHECK(spectral_density(matern(1.3, 0.7, 2.5), v1(0.9)) == Approx(1.7259651326785146).epsilon(1e-13));
    CHECK(spectral_density(matern(1.3, 0.7, 1.5, 2), v2(0.5, 0.8)) == Approx(2.8507422426805853).epsilon(1e-13));
    CHECK(log_spectral_density(matern(1.3, 0.7, 2.5), v1(0.9)) ==
          Approx(std::log(1.7259651326785146)).epsilon(1e-13));
  }

  TEST_CASE("Matern spectral density is the Fourier transform of the covariance") {
    for (double nu : {0.5, 1.5, 2.5}) {
      const KernelSpec k = matern(1.3, 0.7, nu);
      for (double w : {0.0, 0.9, 2.5}) {
        const auto q = oracle::gauss_legendre(20000, 0.0, 80.0);
        double ft = 0.0;
        for (std::size_t i = 0; i < q.nodes.size(); ++i)
          ft += 2.0 * q.weights[i] * exact_covariance(k, v1(q.nodes[i]), v1(0.0)) * std::cos(w * q.nodes[i]);
        CHECK(spectral_density(k, v1(w)) == Approx(ft).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("spectral density integrates to the variance") {
    for (const KernelSpec& k : {se(1.7, {0.6}), matern(1.3, 0.7, 1.5), matern(0.8, 1.4, 2.5)}) {
      double integral = 0.0;
      for (auto [a, b] : {std::pair{0.0, 10.0}, {10.0, 100.0}, {100.0, 1e4}, {1e4, 1e6}}) {
        const auto q = oracle::gauss_legendre(4000, a, b);
        for (std::size_t i = 0; i < q.nodes.size(); ++i)
          integral += 2.0 * q.weights[i] * spectral_density(k, v1(q.nodes[i]));
      }
      CHECK(integral / (2.0 * kPi) == Approx(k.variance).epsilon(1e-4));
    }
  }

  TEST_CASE("exact covariance oracles") {
    CHECK(exact_covariance(matern(1.3, 0.7, 1.5), v1(0.4), v1(-0.5)) == Approx(0.4524720362904896).epsilon(1e-12));
    CHECK(exact_covariance(matern(1.3, 0.7, 2.5), v1(0.9), v1(0.0)) == Approx(0.4862810900350801).epsilon(1e-12));
    CHECK(exact_covariance(se(2.0, {0.5, 3.0}), v2(0.1, 1.0), v2(0.3, -1.0)) ==
          Approx(2.0 * std::exp(-0.5 * (0.04 / 0.25 + 4.0 / 9.0))).epsilon(1e-14));
  }

  TEST_CASE("invalid hyperparameters are rejected") {
    CHECK_THROWS_AS(se(0.0, {1.0}).validate(1), std::invalid_argument);
    CHECK_THROWS_AS(se(1.0, {-1.0}).validate(1), std::invalid_argument);
    CHECK_THROWS_AS(se(1.0, {1.0}).validate(2), DimensionError);
    CHECK_THROWS_AS(matern(1.0, 1.0, 0.0).validate(1), std::invalid_argument);
    CHECK_THROWS_AS((KernelSpec{KernelFamily::Matern, 1.0, {1.0, 2.0}, 1.5}).validate(2), std::invalid_argument);
    CHECK_THROWS_AS(spectral_density(se(-1.0, {1.0}), v1(0.0)), std::invalid_argument);
    CHECK_THROWS_AS(kernel_family_from_string("rbf2"), std::invalid_argument);
    CHECK(kernel_family_from_string("matern") == KernelFamily::Matern);
  }

  TEST_CASE("approximate covariance") {
    const BasisConfig b = grid1(32);
    CHECK(approx_covariance(b, v1(0.3), v1(-1.1)) == Approx(approx_covariance(b, v1(-1.1), v1(0.3))).epsilon(1e-14));
    CHECK(std::abs(approx_covariance(b, v1(0.0), v1(0.0)) - 1.0) < 1e-2);
    const BasisConfig empty(Domain({4.0}), {}, se(1.0, {1.0}));
    CHECK(empty.size() == 0);
    CHECK(approx_covariance(empty, v1(0.0), v1(0.5)) == 0.0);
  }

  TEST_CASE("prior precision") {
    const Vector V = prior_precision(grid1(1));
    CHECK(V[0] == Approx(0.43092024654447747).epsilon(1e-13));
    const Vector V20 = prior_precision(grid1(20));
    for (Eigen::Index j = 1; j < V20.size(); ++j) CHECK(V20[j] >= V20[j - 1]);
    const Vector V20b = prior_precision(grid1(20, 4.0, se(2.0, {1.0})));
    CHECK((V20b - 0.5 * V20).cwiseAbs().maxCoeff() < 1e-12 * V20.maxCoeff());
    CHECK((V20.array() > 0.0).all());
    try {
      prior_precision(grid1(20, 4.0, se(1.0, {30.0})));
      FAIL("expected underflow");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("(4)") != std::string::npos);
    }
  }

  TEST_CASE("eigenfunctions are orthonormal") {
    const double L = 3.0;
    const auto q = oracle::gauss_legendre(10000, -L, L);
    for (int i = 1; i <= 8; ++i)
      for (int j = i; j <= 8; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < q.nodes.size(); ++k)
          s += q.weights[k] * eigenfunction({{i}}, Domain({L}), v1(q.nodes[k])) *
               eigenfunction({{j}}, Domain({L}), v1(q.nodes[k]));
        CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) < 1e-6);
      }
  }

  TEST_CASE("Dirichlet boundary on every face") {
    const Domain d({2.0, 5.0});
    for (int a = 1; a <= 5; ++a)
      for (int b = 1; b <= 5; ++b)
        for (double s : {-0.7, 0.0, 1.3}) {
          CHECK(std::abs(eigenfunction({{a, b}}, d, v2(-2.0, s))) < 1e-12);
          CHECK(std::abs(eigenfunction({{a, b}}, d, v2(2.0, s))) < 1e-12);
          CHECK(std::abs(eigenfunction({{a, b}}, d, v2(s, -5.0))) < 1e-12);
          CHECK(std::abs(eigenfunction({{a, b}}, d, v2(s, 5.0))) < 1e-12);
        }
  }

  TEST_CASE("covariance error shrinks as m doubles") {
    double previous = 1e300;
    for (int m : {4, 8, 16, 32, 64}) {
      const BasisConfig b = grid1(m);
      double err = 0.0;
      for (int i = 0; i <= 40; ++i)
        for (int j = 0; j <= 40; ++j) {
          const double x = -2.0 + 0.1 * i, xp = -2.0 + 0.1 * j;
          err = std::max(err, std::abs(approx_covariance(b, v1(x), v1(xp)) - se_kernel((x - xp) * (x - xp), 1.0, 1.0)));
        }
      CHECK(err <= previous + 1e-10);
      previous = err;
    }
    CHECK(previous < 1e-2);
  }

  TEST_CASE("eigen-structure does not depend on the kernel") {
    const BasisConfig a = BasisConfig::tensor_grid(Domain({4.0, 2.0}), {5, 3}, se(1.0, {1.0, 1.0}));
    const BasisConfig b = a.with_kernel(se(7.0, {0.2, 3.0}));
    CHECK(a.indices() == b.indices());
    CHECK((a.eigenvalues().array() == b.eigenvalues().array()).all());
    const Vector x = v2(0.3, -0.8);
    CHECK((basis_vector(a, x).array() == basis_vector(b, x).array()).all());
    CHECK((a.log_spectral_weights() - b.log_spectral_weights()).cwiseAbs().maxCoeff() > 0.1);
  }
}
