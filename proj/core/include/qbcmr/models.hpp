#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>

#include "qbcmr/basis.hpp"
#include "qbcmr/rng.hpp"

namespace qbcmr {

enum class ModelKind { npiv, npqiv };

/// A conditional moment restriction model: the residual family and its
/// modulus of L2-continuity.
struct MomentModel {
  ModelKind kind = ModelKind::npiv;
  double gamma = 0.5;  // quantile level, npqiv only
  int d_rho = 1;
  double kappa = 1.0;  // 1 for npiv, 0.5 for npqiv

  static MomentModel npiv();
  static MomentModel npqiv(double gamma);
};

/// Generalized residual rho(y, h(x)). Returns a vector of length d_rho.
Eigen::VectorXd residual(const MomentModel& model, double y, double h_at_x);

/// Scalar fast path for the built-in models (d_rho == 1).
inline double residual_scalar(const MomentModel& model, double y, double h_at_x) {
  if (model.kind == ModelKind::npiv) return y - h_at_x;
  return ((y - h_at_x <= 0.0) ? 1.0 : 0.0) - model.gamma;
}

/// Observed sample {(X_i, Y_i, W_i)}. X and W live in unit cubes.
struct Dataset {
  Eigen::MatrixXd X;  // n x d
  Eigen::VectorXd Y;  // n
  Eigen::MatrixXd W;  // n x d_w

  int n() const { return static_cast<int>(Y.size()); }
  void validate() const;
};

/// Copula linking the instrument W to the regressor X. Both keep uniform
/// marginals on [0,1].
///   gaussian:        X = Phi(r Phi^{-1}(W) + sqrt(1-r^2) Phi^{-1}(V));
///                    conditional-expectation operator has geometrically
///                    decaying singular values (severely ill-posed).
///   cosine_mixture:  f(x|w) = 1 + sum_{k=2}^{M} tau_k e_k(x) e_k(w) with
///                    tau_k = strength * k^{-zeta}; the operator is diagonal
///                    in the cosine basis with polynomially decaying singular
///                    values (mildly ill-posed, zeta known by construction).
struct CopulaSpec {
  enum class Kind { gaussian, cosine_mixture };
  Kind kind = Kind::cosine_mixture;
  double strength = 0.3;  // gaussian: correlation r in [0,1); cosine: amplitude
  double zeta = 1.0;      // cosine: polynomial decay of tau_k
  int terms = 16;         // cosine: highest mixture index M

  void validate() const;
  /// tau_k for the cosine mixture (tau_1 = 1 is the constant channel).
  double tau(int k) const;
};

/// Synthetic design with known truth and closed-form conditional law of X
/// given W, so the Frechet operator and the limiting variances can be
/// computed by quadrature.
struct DgpDesign {
  FunctionCoefficients h0;     // truth, on the prior's basis
  double endogeneity = 0.3;    // correlation of structural error with the V channel
  CopulaSpec copula;           // instrument relevance
  double noise_sd = 0.25;      // base error scale
  double het_slope = 0.0;      // sd(w) = noise_sd * (1 + het_slope * (w - 1/2))
  MomentModel model;

  void validate() const;

  double conditional_density(double x, double w) const;  // f_{X|W}(x|w)
  double conditional_cdf(double x, double w) const;      // F_{X|W}(x|w)
  double conditional_quantile(double v, double w) const; // F^{-1}_{X|W}(v|w)

  /// Error scale sd(w); bounded away from 0 by validate().
  double noise_scale(double w) const;

  /// E[ rho(Y, h0(X))^2 | W = w ]: sd(w)^2 for npiv, gamma(1-gamma) for npqiv.
  double residual_conditional_variance(double w) const;

  /// Latent normal coordinate of the V channel given (x, w).
  double latent_uv(double x, double w) const;

  /// Conditional density of the structural error at zero given (X, W);
  /// the kernel of the NPQIV Frechet derivative.
  double u_density_at_zero(double x, double w) const;
};

/// Simulate n observations. W ~ U[0,1], V ~ U[0,1] independent,
/// X = F^{-1}_{X|W}(V|W), and the structural error is driven by
/// Phi^{-1}(V) mixed with fresh Gaussian noise at weight `endogeneity`.
/// For npqiv the error is location-shifted so P(Y <= h0(X) | W) = gamma.
Dataset simulate_dgp(const DgpDesign& design, int n, RngStream& rng);

/// Weighting matrix policy for the quasi-Bayes objective (d_rho == 1: all
/// weights are scalars).
struct WeightFunction {
  enum class Mode { identity, fixed, optimal, cu };
  Mode mode = Mode::identity;

  /// fixed mode: Sigma(w) itself.
  std::function<double(const Eigen::VectorXd&)> fixed_weight;
  /// optimal mode (npiv): fitted conditional variance w -> sigma_hat^2(w).
  std::function<double(const Eigen::VectorXd&)> pilot_variance;
  /// cu mode: estimator of E[rho^2 | W = w] at h.
  std::function<double(const Eigen::VectorXd&, const FunctionCoefficients&)> cu_variance;

  static WeightFunction identity();
  static WeightFunction fixed(std::function<double(const Eigen::VectorXd&)> sigma);
  static WeightFunction optimal(std::function<double(const Eigen::VectorXd&)> pilot);
  static WeightFunction cu(
      std::function<double(const Eigen::VectorXd&, const FunctionCoefficients&)> variance);
};

/// Eigenvalue clamp applied to optimal and continuously-updated weights.
inline constexpr double kWeightClampLo = 1e-3;
inline constexpr double kWeightClampHi = 1e3;

/// Evaluate the weight at a point. Optimal npqiv needs no pilot (the
/// residual variance at the truth is gamma(1-gamma)); optimal npiv requires
/// one; cu requires a function h.
double weight_at(const WeightFunction& wf, const MomentModel& model, const Eigen::VectorXd& w,
                 const FunctionCoefficients* h = nullptr);

}  // namespace qbcmr
