#include <doctest.h>

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include "qbcmr/basis.hpp"
#include "qbcmr/errors.hpp"
#include "qbcmr/quadrature.hpp"
#include "qbcmr/rng.hpp"

using namespace qbcmr;

namespace {
const SieveBasisSpec kCos8{BasisFamily::cosine, 1, 8};
}

TEST_SUITE_BEGIN("unit");

TEST_CASE("cosine basis pointwise values") {
  CHECK(eval_basis(kCos8, 1, 0.37) == doctest::Approx(1.0));
  CHECK(eval_basis(kCos8, 2, 0.0) == doctest::Approx(std::numbers::sqrt2));
  CHECK(eval_basis(kCos8, 3, 0.5) ==
        doctest::Approx(std::numbers::sqrt2 * std::cos(std::numbers::pi)));
  CHECK_THROWS_AS(eval_basis(kCos8, 0, 0.5), invalid_argument_error);
  CHECK_THROWS_AS(eval_basis(kCos8, 9, 0.5), invalid_argument_error);
  CHECK_THROWS_AS(eval_basis(kCos8, 1, 1.5), invalid_argument_error);
  CHECK_THROWS_AS(eval_basis(kCos8, 1, -0.1), invalid_argument_error);
}

TEST_CASE("cosine elements integrate orthonormally (quadrature oracle)") {
  // 10^4-point Gauss-Legendre as the independent oracle for int e_2 e_3.
  const double v = integrate(
      [&](double x) { return eval_basis(kCos8, 2, x) * eval_basis(kCos8, 3, x); }, 0.0, 1.0,
      10000);
  CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("eval_function: zero, constant and naive-loop oracle") {
  FunctionCoefficients zero(kCos8, Eigen::VectorXd::Zero(8));
  CHECK(eval_function(zero, 0.3) == doctest::Approx(0.0));

  Eigen::VectorXd c = Eigen::VectorXd::Zero(8);
  c[0] = 4.5;
  FunctionCoefficients constant(kCos8, c);
  CHECK(eval_function(constant, 0.123) == doctest::Approx(4.5));
  CHECK(eval_function(constant, 0.961) == doctest::Approx(4.5));

  RngStream rng = make_stream(3);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd r(8);
  for (int i = 0; i < 8; ++i) r[i] = gauss(rng);
  FunctionCoefficients h(kCos8, r);
  double naive = 0.0;
  for (int i = 1; i <= 8; ++i) naive += r[i - 1] * eval_basis(kCos8, i, 0.5);
  CHECK(eval_function(h, 0.5) == doctest::Approx(naive).epsilon(1e-14));
}

TEST_CASE("eval_function is linear in coefficients") {
  RngStream rng = make_stream(5);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd c1(8), c2(8);
  for (int i = 0; i < 8; ++i) {
    c1[i] = gauss(rng);
    c2[i] = gauss(rng);
  }
  const double a = 0.7, b = -2.3;
  FunctionCoefficients h1(kCos8, c1), h2(kCos8, c2), mix(kCos8, a * c1 + b * c2);
  for (double x : {0.0, 0.21, 0.5, 0.977, 1.0}) {
    CHECK(eval_function(mix, x) ==
          doctest::Approx(a * eval_function(h1, x) + b * eval_function(h2, x)).epsilon(1e-13));
  }
}

TEST_CASE("design matrix: constants, cos(pi) row, and row cross-check") {
  const SieveBasisSpec one{BasisFamily::cosine, 1, 1};
  Eigen::VectorXd pts(3);
  pts << 0.1, 0.5, 0.9;
  CHECK(design_matrix(one, pts).col(0).isApproxToConstant(1.0));

  const SieveBasisSpec two{BasisFamily::cosine, 1, 2};
  Eigen::VectorXd ends(2);
  ends << 0.0, 1.0;
  const Eigen::MatrixXd d = design_matrix(two, ends);
  CHECK(d(0, 0) == doctest::Approx(1.0));
  CHECK(d(0, 1) == doctest::Approx(std::numbers::sqrt2));
  CHECK(d(1, 0) == doctest::Approx(1.0));
  CHECK(d(1, 1) == doctest::Approx(-std::numbers::sqrt2));

  const Eigen::MatrixXd full = design_matrix(kCos8, pts);
  for (int j = 0; j < 3; ++j)
    for (int i = 1; i <= 8; ++i)
      CHECK(full(j, i - 1) == doctest::Approx(eval_basis(kCos8, i, pts[j])));

  CHECK_THROWS_AS(design_matrix(kCos8, Eigen::VectorXd()), invalid_argument_error);
}

TEST_CASE("tensor enumeration is a bijection for d=2, size=16") {
  const SieveBasisSpec spec{BasisFamily::cosine, 2, 16};
  std::set<std::pair<int, int>> seen;
  for (int i = 1; i <= 16; ++i) {
    const auto mi = basis_multi_index(spec, i);
    REQUIRE(mi.size() == 2);
    CHECK(mi[0] >= 1);
    CHECK(mi[1] >= 1);
    CHECK(mi[0] <= 4);
    CHECK(mi[1] <= 4);
    seen.insert({mi[0], mi[1]});
  }
  CHECK(seen.size() == 16);
}

TEST_CASE("tensor basis evaluates as a product and stays orthonormal") {
  const SieveBasisSpec spec{BasisFamily::cosine, 2, 9};
  Eigen::VectorXd x(2);
  x << 0.3, 0.7;
  for (int i = 1; i <= 9; ++i) {
    const auto mi = basis_multi_index(spec, i);
    const SieveBasisSpec axis{BasisFamily::cosine, 1, 3};
    CHECK(eval_basis(spec, i, x) ==
          doctest::Approx(eval_basis(axis, mi[0], x[0]) * eval_basis(axis, mi[1], x[1])));
  }
}

TEST_CASE("gram: K=1 gives scalar one, duplicated column is singular") {
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(10, 1);
  const GramMatrices g = gram_matrices(ones);
  CHECK(g.G_hat(0, 0) == doctest::Approx(1.0));
  CHECK(g.G_whitened(0, 0) == doctest::Approx(1.0));
  CHECK(g.cond == doctest::Approx(1.0));

  Eigen::MatrixXd dup(10, 2);
  dup.col(0) = Eigen::VectorXd::LinSpaced(10, 0.0, 1.0);
  dup.col(1) = dup.col(0);
  CHECK_THROWS_AS(gram_matrices(dup), numerical_error);
}

TEST_CASE("gram preconditions") {
  Eigen::MatrixXd d(2, 3);
  d.setOnes();
  CHECK_THROWS_AS(gram_matrices(d), invalid_argument_error);  // n < K
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(gram_matrices(Eigen::MatrixXd::Identity(4, 2), asym),
                  invalid_argument_error);
}

TEST_CASE("bspline basis: partition of unity and positive Gram") {
  const SieveBasisSpec bs{BasisFamily::bspline, 1, 6};
  for (double x : {0.0, 0.17, 0.5, 0.83, 1.0}) {
    double sum = 0.0;
    for (int i = 1; i <= 6; ++i) {
      const double v = eval_basis(bs, i, x);
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  const Eigen::MatrixXd g = population_gram(bs);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  // Rows sum to int B_i = knot-span average; total mass is 1.
  CHECK(g.sum() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("bspline whitening against its population Gram") {
  const SieveBasisSpec bs{BasisFamily::bspline, 1, 4};
  RngStream rng = make_stream(17);
  std::uniform_real_distribution<double> unif;
  Eigen::VectorXd pts(5000);
  for (int i = 0; i < pts.size(); ++i) pts[i] = unif(rng);
  const Eigen::MatrixXd design = design_matrix(bs, pts);
  const GramMatrices g = gram_matrices(design, population_gram(bs));
  CHECK((g.G_whitened - Eigen::MatrixXd::Identity(4, 4)).norm() < 0.15);
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("invariants");

TEST_CASE("orthonormality: quadrature Gram of the first 20 cosine elements") {
  const SieveBasisSpec spec{BasisFamily::cosine, 1, 20};
  const QuadratureRule rule = gauss_legendre(2000, 0.0, 1.0);
  Eigen::MatrixXd vals(rule.nodes.size(), 20);
  for (int q = 0; q < rule.nodes.size(); ++q)
    for (int i = 1; i <= 20; ++i) vals(q, i - 1) = eval_basis(spec, i, rule.nodes[q]);
  const Eigen::MatrixXd gram = vals.transpose() * rule.weights.asDiagonal() * vals;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j)
      CHECK(std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)) < 1e-8);
}

TEST_CASE("empirical Gram concentrates: operator error decreasing in m") {
  const SieveBasisSpec spec{BasisFamily::cosine, 1, 10};
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(10, 10);
  std::array<double, 3> mean_err{0.0, 0.0, 0.0};
  const std::array<int, 3> sizes{1000, 10000, 100000};
  for (int s = 0; s < 20; ++s) {
    RngStream rng = make_stream(100 + s);
    std::uniform_real_distribution<double> unif;
    for (std::size_t m = 0; m < sizes.size(); ++m) {
      Eigen::VectorXd pts(sizes[m]);
      for (int i = 0; i < sizes[m]; ++i) pts[i] = unif(rng);
      const Eigen::MatrixXd design = design_matrix(spec, pts);
      const GramMatrices g = gram_matrices(design, eye);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.G_whitened - eye);
      mean_err[m] += es.eigenvalues().cwiseAbs().maxCoeff() / 20.0;
    }
  }
  CHECK(mean_err[0] > mean_err[1]);
  CHECK(mean_err[1] > mean_err[2]);
  // Monte Carlo analogue of the sqrt(K log K / n) operator-norm bound.
  CHECK(mean_err[2] <= 0.05);
}

TEST_SUITE_END();
