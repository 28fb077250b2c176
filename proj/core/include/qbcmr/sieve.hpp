#pragma once

#include <Eigen/Core>
#include <memory>

#include "qbcmr/basis.hpp"
#include "qbcmr/models.hpp"
#include "qbcmr/prior.hpp"

namespace qbcmr {

/// Precomputed first-stage machinery: whitened design, whitened Gram inverse,
/// and the dataset. Immutable after construction; shared across chains.
struct FirstStageFit {
  SieveBasisSpec basisW;
  GramMatrices gram;
  Eigen::MatrixXd whitened_design;  // n x K, row i = (G^{-1/2} b^K(W_i))'
  Eigen::MatrixXd whitened_gram_inv;  // [G_whitened]^{-1}
  Dataset data;
  int K = 0;
  int n = 0;

  /// Whitened basis vector G^{-1/2} b^K(w) at an arbitrary point.
  Eigen::VectorXd whitened_basis(const Eigen::VectorXd& w) const;
};

/// Least squares projection machinery for m_hat. Requires n > K and a
/// non-singular design.
FirstStageFit first_stage_fit(const Dataset& data, const SieveBasisSpec& basisW);

/// Residuals rho(Y_i, h(X_i)) for all observations.
Eigen::VectorXd residual_vector(const Dataset& data, const MomentModel& model,
                                const FunctionCoefficients& h);

/// The series estimator m_hat(w, h) = E_n[rho b'] G_hat^{-1} b(w), evaluated
/// through the whitened factors. Returns a d_rho-vector.
Eigen::VectorXd mhat(const FirstStageFit& fit, const MomentModel& model,
                     const FunctionCoefficients& h, const Eigen::VectorXd& w);

/// m_hat evaluated at every sample point W_i at once (n-vector, d_rho == 1).
Eigen::VectorXd mhat_at_sample(const FirstStageFit& fit, const Eigen::VectorXd& residuals);

/// Objective specification: which fit, which weighting, and (optionally) a
/// cached X-design matrix so h(X_i) is a single matrix-vector product.
struct ObjectiveSpec {
  std::shared_ptr<const FirstStageFit> fit;
  MomentModel model;
  WeightFunction weights;
  SieveBasisSpec basisX;      // basis the candidate h lives on
  Eigen::MatrixXd x_design;   // n x J cache of e_i(X_j)

  bool continuously_updated() const { return weights.mode == WeightFunction::Mode::cu; }
};

/// Build an ObjectiveSpec, precomputing the X-design cache.
ObjectiveSpec make_objective(std::shared_ptr<const FirstStageFit> fit, const MomentModel& model,
                             const WeightFunction& weights, const SieveBasisSpec& basisX);

/// The quasi-Bayes objective Q_n(h) = E_n[ m_hat(W,h)' Sigma_hat(W) m_hat(W,h) ].
/// Identity weighting uses the K-dimensional quadratic form
/// E_n(|m_hat|^2) = [E_n R_h]' [G_whitened]^{-1} [E_n R_h]  (cost O(nK + K^2));
/// other modes evaluate m_hat at each W_i. CU mode re-estimates Sigma(W, h)
/// per call via a series projection of the squared residuals.
double quasi_objective(const ObjectiveSpec& spec, const FunctionCoefficients& h);

/// Same, reusing a precomputed residual vector on the fit's dataset.
double quasi_objective_with_residuals(const ObjectiveSpec& spec, const Eigen::VectorXd& residuals,
                                      const FunctionCoefficients& h);

/// Sieve-dimension rule: the largest K >= 1 with
/// sqrt(K)/sqrt(n) <= sigma_K K^{-alpha/d}, by ascending scan.
int select_K(int n, double alpha, const WeakNormWeights& weights, int d);

}  // namespace qbcmr
