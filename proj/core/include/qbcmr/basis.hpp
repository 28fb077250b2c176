#pragma once

#include <Eigen/Core>
#include <vector>

namespace qbcmr {

enum class BasisFamily { cosine, bspline };

/// Identifies an orthonormal basis family on [0,1]^d together with its
/// truncation level. For d > 1 a linear index enumerates tensor products of
/// one-dimensional elements, graded by the maximum per-axis index with ties
/// broken lexicographically.
struct SieveBasisSpec {
  BasisFamily family = BasisFamily::cosine;
  int dim = 1;
  int size = 1;

  SieveBasisSpec() = default;
  SieveBasisSpec(BasisFamily family_, int dim_, int size_);

  bool operator==(const SieveBasisSpec&) const = default;
};

/// Multi-index (1-based per axis) of linear basis element i (1-based).
std::vector<int> basis_multi_index(const SieveBasisSpec& spec, int i);

/// Evaluate basis element i at a point of the unit cube.
/// Cosine family, d=1: e_1 = 1, e_i(x) = sqrt(2) cos(pi (i-1) x) for i >= 2.
double eval_basis(const SieveBasisSpec& spec, int i, const Eigen::VectorXd& x);
double eval_basis(const SieveBasisSpec& spec, int i, double x);  // d=1 shorthand

/// A function represented by its coefficients on a fixed basis:
/// h(x) = sum_i coeffs[i] e_i(x).
struct FunctionCoefficients {
  SieveBasisSpec basis;
  Eigen::VectorXd coeffs;

  FunctionCoefficients() = default;
  FunctionCoefficients(SieveBasisSpec basis_, Eigen::VectorXd coeffs_);
};

double eval_function(const FunctionCoefficients& h, const Eigen::VectorXd& x);
double eval_function(const FunctionCoefficients& h, double x);

/// Rows index points, columns index basis elements: entry (j, i) = e_i(p_j).
Eigen::MatrixXd design_matrix(const SieveBasisSpec& spec, const Eigen::MatrixXd& points);
Eigen::MatrixXd design_matrix(const SieveBasisSpec& spec, const Eigen::VectorXd& points);

/// Population (reference) Gram matrix of the basis under the uniform design
/// density. Identity for the cosine family; computed by Gauss-Legendre
/// quadrature for B-splines.
Eigen::MatrixXd population_gram(const SieveBasisSpec& spec, int quad_nodes = 256);

/// Empirical and whitened Gram matrices of a design.
struct GramMatrices {
  Eigen::MatrixXd G;           // reference Gram G_{b,K}
  Eigen::MatrixXd G_hat;       // empirical Gram (1/n) B'B
  Eigen::MatrixXd G_whitened;  // G^{-1/2} G_hat G^{-1/2}
  Eigen::MatrixXd G_inv_sqrt;  // symmetric G^{-1/2} used for whitening
  double cond = 1.0;           // condition number of G_hat
};

/// Build GramMatrices from a design matrix and a reference Gram (identity if
/// omitted). Throws numerical_error when the empirical Gram's condition
/// number exceeds 1e10 (K too large for n, duplicated columns, ...).
GramMatrices gram_matrices(const Eigen::MatrixXd& design, const Eigen::MatrixXd& reference);
GramMatrices gram_matrices(const Eigen::MatrixXd& design);

/// Symmetric positive-semidefinite square root / inverse square root via
/// eigendecomposition with an eigenvalue floor of 1e-12.
Eigen::MatrixXd matrix_sqrt_sym(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_inv_sqrt_sym(const Eigen::MatrixXd& m);

/// Condition-number ceiling past which designs are rejected as singular.
inline constexpr double kGramConditionCeiling = 1e10;

}  // namespace qbcmr
