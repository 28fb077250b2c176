#pragma once

#include <Eigen/Core>

#include "qbcmr/basis.hpp"
#include "qbcmr/rng.hpp"

namespace qbcmr {

/// Truncated Gaussian series prior: draws are
///   sum_{i<=J} scale * sqrt(lambda_i) Z_i e_i,   lambda_i = i^{-(1+2a/d)},
/// a trace-class spectrum matching the Matern eigenvalue scaling.
struct GaussianSeriesPrior {
  SieveBasisSpec basis;    // truncation J = basis.size
  double alpha = 1.0;      // regularity
  Eigen::VectorXd lambda;  // strictly decreasing, positive
  double scale = 1.0;      // multiplier applied to draws

  GaussianSeriesPrior() = default;
  GaussianSeriesPrior(SieveBasisSpec basis_, double alpha_, double scale_);

  /// Standard deviation of coefficient i (1-based): scale * sqrt(lambda_i).
  double coeff_sd(int i) const;

  /// Map standardized coordinates z ~ N(0, I_J) to function coefficients.
  FunctionCoefficients transform(const Eigen::VectorXd& z) const;
};

/// Prior with the sample-size-dependent scale 1/(sqrt(log n) sqrt(K)).
/// Throws for n < 2 (log n <= 0 would invert the scaling's intent).
GaussianSeriesPrior scaled_prior(double alpha, int J, int K, int n, const SieveBasisSpec& basis);

/// One draw from the prior.
FunctionCoefficients sample_prior(const GaussianSeriesPrior& prior, RngStream& rng);

enum class IllPosedness { mild, severe, custom };

/// Coefficient-shrinking weights defining a weak norm. Mild decay is
/// sigma_i = i^{-zeta/d}, severe is sigma_i = exp(-R i^{zeta/d}).
struct WeakNormWeights {
  IllPosedness kind = IllPosedness::mild;
  double zeta = 1.0;
  double R = 0.0;
  int dim = 1;
  Eigen::VectorXd custom;  // used only for kind == custom

  static WeakNormWeights mild(double zeta, int dim = 1);
  static WeakNormWeights severe(double R, double zeta, int dim = 1);
  static WeakNormWeights custom_weights(Eigen::VectorXd sigma);

  /// sigma_i, 1-based.
  double sigma(int i) const;
};

/// sqrt( sum_i i^{2 beta / d} c_i^2 ) over the truncation.
double sobolev_norm(const FunctionCoefficients& h, double beta);

/// RKHS norm of the alpha-regular Gaussian series prior:
/// sqrt( sum_i i^{1 + 2 alpha / d} c_i^2 ).
double rkhs_norm(const FunctionCoefficients& h, double alpha);

/// sqrt( sum_i sigma_i^2 c_i^2 ).
double weak_norm(const FunctionCoefficients& h, const WeakNormWeights& w);

}  // namespace qbcmr
