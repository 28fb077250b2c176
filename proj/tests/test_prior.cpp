#include <doctest.h>

#include <cmath>
#include <vector>

#include "qbcmr/errors.hpp"
#include "qbcmr/prior.hpp"

using namespace qbcmr;

namespace {
const SieveBasisSpec kBasis8{BasisFamily::cosine, 1, 8};

FunctionCoefficients unit_vector(const SieveBasisSpec& basis, int i) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size);
  c[i - 1] = 1.0;
  return FunctionCoefficients(basis, c);
}
}  // namespace

TEST_SUITE_BEGIN("unit");

TEST_CASE("prior spectrum: lambda_i = i^{-(1+2a/d)}, decreasing and trace class") {
  const GaussianSeriesPrior prior(kBasis8, 1.0, 2.0);
  CHECK(prior.lambda[0] == doctest::Approx(1.0));
  CHECK(prior.lambda[1] == doctest::Approx(std::pow(2.0, -3.0)));
  for (int i = 0; i + 1 < 8; ++i) CHECK(prior.lambda[i + 1] < prior.lambda[i]);
  CHECK(prior.coeff_sd(2) == doctest::Approx(2.0 * 0.3535533905932738));
}

TEST_CASE("sample_prior: zero scale gives the zero function") {
  const GaussianSeriesPrior prior(kBasis8, 1.0, 0.0);
  RngStream rng = make_stream(1);
  const FunctionCoefficients draw = sample_prior(prior, rng);
  CHECK(draw.coeffs.norm() == doctest::Approx(0.0));
}

TEST_CASE("scaled_prior: 1/(sqrt(log n) sqrt(K)) and its ratios") {
  const GaussianSeriesPrior p1 = scaled_prior(1.0, 8, 1, 3, kBasis8);
  CHECK(p1.scale == doctest::Approx(1.0 / std::sqrt(std::log(3.0))).epsilon(1e-12));
  CHECK(p1.scale == doctest::Approx(0.9540645820000013).epsilon(1e-10));

  const GaussianSeriesPrior p4 = scaled_prior(1.0, 8, 4, 3, kBasis8);
  CHECK(p4.scale == doctest::Approx(0.5 * p1.scale).epsilon(1e-12));

  const GaussianSeriesPrior p2 = scaled_prior(1.0, 8, 2, 3, kBasis8);
  CHECK(p2.scale == doctest::Approx(p1.scale / std::sqrt(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(scaled_prior(1.0, 8, 1, 1, kBasis8), invalid_argument_error);
}

TEST_CASE("sobolev norm: basis elements and loop oracle") {
  CHECK(sobolev_norm(unit_vector(kBasis8, 1), 0.7) == doctest::Approx(1.0));
  CHECK(sobolev_norm(unit_vector(kBasis8, 1), 3.0) == doctest::Approx(1.0));
  CHECK(sobolev_norm(unit_vector(kBasis8, 2), 1.0) == doctest::Approx(2.0));

  RngStream rng = make_stream(2);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd c(8);
  for (int i = 0; i < 8; ++i) c[i] = gauss(rng);
  const FunctionCoefficients h(kBasis8, c);
  const double beta = 1.3;
  double naive = 0.0;
  for (int i = 1; i <= 8; ++i) naive += std::pow(i, 2.0 * beta) * c[i - 1] * c[i - 1];
  CHECK(sobolev_norm(h, beta) == doctest::Approx(std::sqrt(naive)).epsilon(1e-14));
}

TEST_CASE("rkhs norm: elements and domination of the alpha-Sobolev norm") {
  CHECK(rkhs_norm(unit_vector(kBasis8, 1), 1.0) == doctest::Approx(1.0));
  CHECK(rkhs_norm(unit_vector(kBasis8, 2), 1.0) == doctest::Approx(std::sqrt(8.0)));

  RngStream rng = make_stream(4);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXd c(8);
    for (int i = 0; i < 8; ++i) c[i] = gauss(rng);
    const FunctionCoefficients h(kBasis8, c);
    const double alpha = 0.5 + 2.0 * std::abs(gauss(rng));
    CHECK(rkhs_norm(h, alpha) >= sobolev_norm(h, alpha) - 1e-12);
  }
}

TEST_CASE("weak norm: flat, mild and severe weights") {
  const FunctionCoefficients e2 = unit_vector(kBasis8, 2);
  CHECK(weak_norm(e2, WeakNormWeights::mild(0.0)) == doctest::Approx(1.0));  // sigma == 1
  CHECK(weak_norm(e2, WeakNormWeights::mild(1.0)) == doctest::Approx(0.5));
  CHECK(weak_norm(e2, WeakNormWeights::severe(1.0, 1.0)) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-12));

  RngStream rng = make_stream(6);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd c(8);
  for (int i = 0; i < 8; ++i) c[i] = gauss(rng);
  const FunctionCoefficients h(kBasis8, c);
  CHECK(weak_norm(h, WeakNormWeights::mild(0.0)) == doctest::Approx(c.norm()).epsilon(1e-13));
}

TEST_CASE("weak norm weights validate monotonicity for custom sequences") {
  Eigen::VectorXd rising(3);
  rising << 0.1, 0.5, 0.2;
  CHECK_THROWS_AS(WeakNormWeights::custom_weights(rising), invalid_argument_error);
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("invariants");

TEST_CASE("draw moments: mean and variance of coefficients over 1e5 draws") {
  const int N = 100000;
  const GaussianSeriesPrior prior(SieveBasisSpec{BasisFamily::cosine, 1, 10}, 1.0, 0.8);
  RngStream rng = make_stream(77);
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(2, 10);  // first and second moments
  for (int k = 0; k < N; ++k) {
    const FunctionCoefficients draw = sample_prior(prior, rng);
    sums.row(0) += draw.coeffs.transpose();
    sums.row(1) += draw.coeffs.array().square().matrix().transpose();
  }
  for (int i = 1; i <= 10; ++i) {
    const double sd = prior.coeff_sd(i);
    const double mean = sums(0, i - 1) / N;
    const double var = sums(1, i - 1) / N - mean * mean;
    CHECK(std::abs(mean) <= 4.0 * sd / std::sqrt(static_cast<double>(N)));
    CHECK(var == doctest::Approx(sd * sd).epsilon(0.05));
    if (i == 2) CHECK(var == doctest::Approx(0.8 * 0.8 * 0.125).epsilon(0.03));
  }
}

TEST_CASE("norm ordering: sobolev norm nondecreasing in beta") {
  RngStream rng = make_stream(78);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 30; ++rep) {
    Eigen::VectorXd c(12);
    for (int i = 0; i < 12; ++i) c[i] = gauss(rng);
    const FunctionCoefficients h(SieveBasisSpec{BasisFamily::cosine, 1, 12}, c);
    const double b1 = std::abs(gauss(rng)), b2 = b1 + std::abs(gauss(rng));
    CHECK(sobolev_norm(h, b1) <= sobolev_norm(h, b2) + 1e-12);
  }
}

TEST_CASE("almost-alpha regularity: E|G|^2_beta grows for beta >= alpha, Cauchy below") {
  // alpha = 2, d = 1; beta = 2.5 grows with J while beta = 1 stabilizes.
  const double alpha = 2.0;
  const int reps = 400;
  std::vector<int> js{32, 64, 128, 256, 512, 1024};
  std::vector<double> rough_means, smooth_means;
  for (int J : js) {
    const GaussianSeriesPrior prior(SieveBasisSpec{BasisFamily::cosine, 1, J}, alpha, 1.0);
    RngStream rng = make_stream(5000 + J);
    double rough = 0.0, smooth = 0.0;
    for (int k = 0; k < reps; ++k) {
      const FunctionCoefficients draw = sample_prior(prior, rng);
      const double nr = sobolev_norm(draw, 2.5);
      const double ns = sobolev_norm(draw, 1.0);
      rough += nr * nr / reps;
      smooth += ns * ns / reps;
    }
    rough_means.push_back(rough);
    smooth_means.push_back(smooth);
  }
  // Growth when beta >= alpha: E|G|^2_{2.5} = sum_{i<=J} i^{2*2.5} lambda_i grows.
  CHECK(rough_means.back() > 4.0 * rough_means.front());
  // Cauchy in J when beta <= alpha - d/2: successive means settle.
  const double last = smooth_means[smooth_means.size() - 1];
  const double prev = smooth_means[smooth_means.size() - 2];
  CHECK(std::abs(last - prev) < 0.12 * std::abs(last));
}

TEST_CASE("weak norm never exceeds the L2 norm when sigma <= 1") {
  RngStream rng = make_stream(79);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 30; ++rep) {
    Eigen::VectorXd c(10);
    for (int i = 0; i < 10; ++i) c[i] = gauss(rng);
    const FunctionCoefficients h(SieveBasisSpec{BasisFamily::cosine, 1, 10}, c);
    CHECK(weak_norm(h, WeakNormWeights::mild(0.7)) <= c.norm() + 1e-12);
    CHECK(weak_norm(h, WeakNormWeights::severe(0.5, 1.0)) <= c.norm() + 1e-12);
  }
}

TEST_SUITE_END();
