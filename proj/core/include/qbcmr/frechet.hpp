#pragma once

#include <Eigen/Core>
#include <functional>

#include "qbcmr/models.hpp"
#include "qbcmr/prior.hpp"

namespace qbcmr {

/// Quadrature representation of the Frechet derivative D_{h0} of the
/// conditional mean map h -> m(W, h) for a synthetic design.
/// For npiv, D[h](w) = -E[h(X)|W=w]; for npqiv,
/// D[h](w) = E[f_{U|X,W}(0) h(X) | W=w].
struct FrechetOperator {
  SieveBasisSpec basisX;
  SieveBasisSpec basisW;
  Eigen::VectorXd w_nodes;    // quadrature nodes in [0,1] for the W integral
  Eigen::VectorXd w_weights;  // matching weights (uniform W density)
  Eigen::MatrixXd d_values;   // Q x J: D[e_i] evaluated at the nodes
  Eigen::MatrixXd matrix;     // J x K: entry (i,j) = <D[e_i], b_j>_{L2(W)}

  /// Values of D[h] at the quadrature nodes for h given by X-basis coeffs.
  Eigen::VectorXd apply(const Eigen::VectorXd& coeffs) const;

  /// Unweighted adjoint composition D*D (J x J).
  Eigen::MatrixXd adjoint_composition() const;

  /// Adjoint composition in the Sigma-weighted codomain inner product:
  /// (D* Sigma D)_{ii'} = int D[e_i](w) Sigma(w) D[e_{i'}](w) dw.
  Eigen::MatrixXd adjoint_composition(const std::function<double(double)>& sigma) const;

  /// Singular values of `matrix`, descending.
  Eigen::VectorXd singular_values() const;
};

/// Build the operator by tensor quadrature with successive refinement; throws
/// numerical_error if two refinement levels differ by more than 1e-6.
FrechetOperator frechet_operator_matrix(const DgpDesign& design, const SieveBasisSpec& basisX,
                                        const SieveBasisSpec& basisW);

/// Label a decaying singular-value sequence as mildly (polynomial decay) or
/// severely (exponential decay) ill-posed by comparing log-log and log-linear
/// fits. The leading (constant-channel) value is ignored.
IllPosedness classify_illposedness(const Eigen::VectorXd& singular_values);

}  // namespace qbcmr
