#include "qbcmr/prior.hpp"

#include <cmath>

#include "qbcmr/errors.hpp"

namespace qbcmr {

GaussianSeriesPrior::GaussianSeriesPrior(SieveBasisSpec basis_, double alpha_, double scale_)
    : basis(basis_), alpha(alpha_), scale(scale_) {
  if (!(alpha > 0.0)) throw invalid_argument_error("GaussianSeriesPrior: alpha must be > 0");
  if (!(scale >= 0.0)) throw invalid_argument_error("GaussianSeriesPrior: scale must be >= 0");
  const double expo = 1.0 + 2.0 * alpha / basis.dim;
  lambda.resize(basis.size);
  for (int i = 1; i <= basis.size; ++i) lambda[i - 1] = std::pow(static_cast<double>(i), -expo);
}

double GaussianSeriesPrior::coeff_sd(int i) const {
  if (i < 1 || i > basis.size) throw invalid_argument_error("coeff_sd: index out of range");
  return scale * std::sqrt(lambda[i - 1]);
}

FunctionCoefficients GaussianSeriesPrior::transform(const Eigen::VectorXd& z) const {
  if (z.size() != basis.size)
    throw invalid_argument_error("GaussianSeriesPrior::transform: z has wrong length");
  Eigen::VectorXd coeffs = scale * lambda.cwiseSqrt().cwiseProduct(z);
  return FunctionCoefficients(basis, std::move(coeffs));
}

GaussianSeriesPrior scaled_prior(double alpha, int J, int K, int n,
                                 const SieveBasisSpec& basis) {
  if (n < 2) throw invalid_argument_error("scaled_prior: n must be >= 2");
  if (K < 1) throw invalid_argument_error("scaled_prior: K must be >= 1");
  if (J < 1) throw invalid_argument_error("scaled_prior: J must be >= 1");
  SieveBasisSpec b = basis;
  b.size = J;
  const double scale = 1.0 / (std::sqrt(std::log(static_cast<double>(n))) *
                              std::sqrt(static_cast<double>(K)));
  return GaussianSeriesPrior(b, alpha, scale);
}

FunctionCoefficients sample_prior(const GaussianSeriesPrior& prior, RngStream& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd z(prior.basis.size);
  for (int i = 0; i < z.size(); ++i) z[i] = gauss(rng);
  return prior.transform(z);
}

WeakNormWeights WeakNormWeights::mild(double zeta, int dim) {
  if (zeta < 0.0) throw invalid_argument_error("WeakNormWeights: zeta must be >= 0");
  WeakNormWeights w;
  w.kind = IllPosedness::mild;
  w.zeta = zeta;
  w.dim = dim;
  return w;
}

WeakNormWeights WeakNormWeights::severe(double R, double zeta, int dim) {
  if (R < 0.0 || zeta < 0.0)
    throw invalid_argument_error("WeakNormWeights: R and zeta must be >= 0");
  WeakNormWeights w;
  w.kind = IllPosedness::severe;
  w.R = R;
  w.zeta = zeta;
  w.dim = dim;
  return w;
}

WeakNormWeights WeakNormWeights::custom_weights(Eigen::VectorXd sigma) {
  for (int i = 0; i + 1 < sigma.size(); ++i)
    if (sigma[i + 1] > sigma[i] + 1e-15)
      throw invalid_argument_error("WeakNormWeights: sigma must be nonincreasing");
  WeakNormWeights w;
  w.kind = IllPosedness::custom;
  w.custom = std::move(sigma);
  return w;
}

double WeakNormWeights::sigma(int i) const {
  if (i < 1) throw invalid_argument_error("WeakNormWeights::sigma: index must be >= 1");
  switch (kind) {
    case IllPosedness::mild:
      return std::pow(static_cast<double>(i), -zeta / dim);
    case IllPosedness::severe:
      return std::exp(-R * std::pow(static_cast<double>(i), zeta / dim));
    case IllPosedness::custom:
      if (i > custom.size())
        throw invalid_argument_error("WeakNormWeights::sigma: index beyond custom weights");
      return custom[i - 1];
  }
  return 0.0;  // unreachable
}

double sobolev_norm(const FunctionCoefficients& h, double beta) {
  double s = 0.0;
  for (int i = 1; i <= h.basis.size; ++i)
    s += std::pow(static_cast<double>(i), 2.0 * beta / h.basis.dim) * h.coeffs[i - 1] *
         h.coeffs[i - 1];
  return std::sqrt(s);
}

double rkhs_norm(const FunctionCoefficients& h, double alpha) {
  double s = 0.0;
  for (int i = 1; i <= h.basis.size; ++i)
    s += std::pow(static_cast<double>(i), 1.0 + 2.0 * alpha / h.basis.dim) * h.coeffs[i - 1] *
         h.coeffs[i - 1];
  return std::sqrt(s);
}

double weak_norm(const FunctionCoefficients& h, const WeakNormWeights& w) {
  if (w.kind == IllPosedness::custom && w.custom.size() < h.basis.size)
    throw invalid_argument_error("weak_norm: custom weights shorter than coefficient vector");
  double s = 0.0;
  for (int i = 1; i <= h.basis.size; ++i) {
    const double sig = w.sigma(i);
    s += sig * sig * h.coeffs[i - 1] * h.coeffs[i - 1];
  }
  return std::sqrt(s);
}

}  // namespace qbcmr
