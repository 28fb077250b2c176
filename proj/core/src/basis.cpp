#include "qbcmr/basis.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>

#include "qbcmr/errors.hpp"
#include "qbcmr/quadrature.hpp"

namespace qbcmr {

namespace {

// Per-axis truncation implied by a tensor enumeration of `size` elements:
// smallest L with L^d >= size.
int axis_truncation(const SieveBasisSpec& spec) {
  int L = 1;
  while (std::pow(static_cast<double>(L), spec.dim) < static_cast<double>(spec.size)) ++L;
  return L;
}

int one_d_size(const SieveBasisSpec& spec) {
  return spec.dim == 1 ? spec.size : axis_truncation(spec);
}

void check_point(const SieveBasisSpec& spec, const Eigen::VectorXd& x) {
  if (x.size() != spec.dim)
    throw invalid_argument_error("eval_basis: point dimension does not match basis dim");
  for (int j = 0; j < x.size(); ++j)
    if (!(x[j] >= 0.0 && x[j] <= 1.0))
      throw invalid_argument_error("eval_basis: point outside the unit cube");
}

double cosine_1d(int i, double x) {
  if (i == 1) return 1.0;
  return std::numbers::sqrt2 * std::cos(std::numbers::pi * (i - 1) * x);
}

// Clamped uniform B-splines of order min(4, size) on [0,1], Cox-de Boor.
struct BsplineRule {
  int order;
  std::vector<double> knots;
};

BsplineRule bspline_rule(int size) {
  BsplineRule r;
  r.order = std::min(4, size);
  const int n_interior = size - r.order;
  r.knots.assign(r.order, 0.0);
  for (int i = 1; i <= n_interior; ++i)
    r.knots.push_back(static_cast<double>(i) / (n_interior + 1));
  for (int i = 0; i < r.order; ++i) r.knots.push_back(1.0);
  return r;
}

double bspline_1d(int i, double x, int size) {
  const BsplineRule rule = bspline_rule(size);
  const int k = rule.order;
  const auto& t = rule.knots;
  // B_{i,1}: right-closed on the last span so x = 1 is covered.
  std::vector<double> b(size + k);
  for (int j = 0; j < size + k - 1; ++j) {
    const bool last = t[j] < 1.0 && t[j + 1] >= 1.0;
    b[j] = (x >= t[j] && (x < t[j + 1] || (last && x <= 1.0))) ? 1.0 : 0.0;
  }
  for (int ord = 2; ord <= k; ++ord) {
    for (int j = 0; j + ord < static_cast<int>(t.size()); ++j) {
      double left = 0.0, right = 0.0;
      if (t[j + ord - 1] > t[j]) left = (x - t[j]) / (t[j + ord - 1] - t[j]) * b[j];
      if (t[j + ord] > t[j + 1]) right = (t[j + ord] - x) / (t[j + ord] - t[j + 1]) * b[j + 1];
      b[j] = left + right;
    }
  }
  return b[i - 1];
}

double eval_1d(const SieveBasisSpec& spec, int i, double x) {
  switch (spec.family) {
    case BasisFamily::cosine: return cosine_1d(i, x);
    case BasisFamily::bspline: return bspline_1d(i, x, one_d_size(spec));
  }
  return 0.0;  // unreachable
}

}  // namespace

SieveBasisSpec::SieveBasisSpec(BasisFamily family_, int dim_, int size_)
    : family(family_), dim(dim_), size(size_) {
  if (dim < 1) throw invalid_argument_error("SieveBasisSpec: dim must be >= 1");
  if (size < 1) throw invalid_argument_error("SieveBasisSpec: size must be >= 1");
}

std::vector<int> basis_multi_index(const SieveBasisSpec& spec, int i) {
  if (i < 1 || i > spec.size)
    throw invalid_argument_error("basis_multi_index: index out of range");
  if (spec.dim == 1) return {i};
  // Graded by max index: shell L holds multi-indices with max = L, in
  // lexicographic order; shells are exhausted in turn.
  int count = 0;
  for (int L = 1;; ++L) {
    std::vector<int> idx(spec.dim, 1);
    while (true) {
      int mx = 1;
      for (int v : idx) mx = std::max(mx, v);
      if (mx == L) {
        ++count;
        if (count == i) return idx;
      }
      int j = spec.dim - 1;
      while (j >= 0 && idx[j] == L) idx[j--] = 1;
      if (j < 0) break;
      ++idx[j];
    }
  }
}

double eval_basis(const SieveBasisSpec& spec, int i, const Eigen::VectorXd& x) {
  if (i < 1 || i > spec.size) throw invalid_argument_error("eval_basis: index out of range");
  check_point(spec, x);
  if (spec.dim == 1) return eval_1d(spec, i, x[0]);
  const std::vector<int> mi = basis_multi_index(spec, i);
  double v = 1.0;
  for (int j = 0; j < spec.dim; ++j) v *= eval_1d(spec, mi[j], x[j]);
  return v;
}

double eval_basis(const SieveBasisSpec& spec, int i, double x) {
  Eigen::VectorXd p(1);
  p[0] = x;
  return eval_basis(spec, i, p);
}

FunctionCoefficients::FunctionCoefficients(SieveBasisSpec basis_, Eigen::VectorXd coeffs_)
    : basis(basis_), coeffs(std::move(coeffs_)) {
  if (coeffs.size() != basis.size)
    throw invalid_argument_error("FunctionCoefficients: coefficient length != basis size");
  if (!coeffs.allFinite())
    throw invalid_argument_error("FunctionCoefficients: coefficients must be finite");
}

double eval_function(const FunctionCoefficients& h, const Eigen::VectorXd& x) {
  double sum = 0.0;
  for (int i = 1; i <= h.basis.size; ++i) sum += h.coeffs[i - 1] * eval_basis(h.basis, i, x);
  return sum;
}

double eval_function(const FunctionCoefficients& h, double x) {
  Eigen::VectorXd p(1);
  p[0] = x;
  return eval_function(h, p);
}

Eigen::MatrixXd design_matrix(const SieveBasisSpec& spec, const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  if (n < 1) throw invalid_argument_error("design_matrix: empty point set");
  if (points.cols() != spec.dim)
    throw invalid_argument_error("design_matrix: point dimension does not match basis dim");
  Eigen::MatrixXd design(n, spec.size);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::VectorXd xj = points.row(j).transpose();
    for (int i = 1; i <= spec.size; ++i) design(j, i - 1) = eval_basis(spec, i, xj);
  }
  return design;
}

Eigen::MatrixXd design_matrix(const SieveBasisSpec& spec, const Eigen::VectorXd& points) {
  return design_matrix(spec, Eigen::MatrixXd(points));
}

Eigen::MatrixXd population_gram(const SieveBasisSpec& spec, int quad_nodes) {
  if (spec.family == BasisFamily::cosine)
    return Eigen::MatrixXd::Identity(spec.size, spec.size);
  // Tensor quadrature of int e_i e_j over the unit cube.
  const QuadratureRule rule = gauss_legendre(quad_nodes, 0.0, 1.0);
  const int m = one_d_size(spec);
  const SieveBasisSpec axis{spec.family, 1, m};
  Eigen::MatrixXd vals(quad_nodes, m);
  for (int q = 0; q < quad_nodes; ++q)
    for (int i = 1; i <= m; ++i) vals(q, i - 1) = eval_1d(axis, i, rule.nodes[q]);
  Eigen::MatrixXd g1 = vals.transpose() * rule.weights.asDiagonal() * vals;
  if (spec.dim == 1) return g1;
  Eigen::MatrixXd g(spec.size, spec.size);
  for (int i = 1; i <= spec.size; ++i) {
    const auto mi = basis_multi_index(spec, i);
    for (int j = 1; j <= spec.size; ++j) {
      const auto mj = basis_multi_index(spec, j);
      double v = 1.0;
      for (int a = 0; a < spec.dim; ++a) v *= g1(mi[a] - 1, mj[a] - 1);
      g(i - 1, j - 1) = v;
    }
  }
  return g;
}

Eigen::MatrixXd matrix_sqrt_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(1e-12);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd matrix_inv_sqrt_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(1e-12);
  return es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

GramMatrices gram_matrices(const Eigen::MatrixXd& design, const Eigen::MatrixXd& reference) {
  const Eigen::Index n = design.rows();
  const Eigen::Index k = design.cols();
  if (n < k) throw invalid_argument_error("gram_matrices: need n >= K");
  if (reference.rows() != k || reference.cols() != k)
    throw invalid_argument_error("gram_matrices: reference has wrong shape");
  if (!reference.isApprox(reference.transpose(), 1e-10))
    throw invalid_argument_error("gram_matrices: reference must be symmetric");

  GramMatrices out;
  out.G = reference;
  out.G_hat = (design.transpose() * design) / static_cast<double>(n);
  out.G_hat = 0.5 * (out.G_hat + out.G_hat.transpose().eval());  // enforce exact symmetry

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.G_hat);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo < -1e-12) throw numerical_error("gram_matrices: empirical Gram has negative eigenvalue");
  out.cond = (lo <= 0.0) ? std::numeric_limits<double>::infinity() : hi / lo;
  if (out.cond > kGramConditionCeiling)
    throw numerical_error("gram_matrices: singular design (condition number " +
                          std::to_string(out.cond) + " exceeds 1e10; K too large for n?)");

  out.G_inv_sqrt = matrix_inv_sqrt_sym(reference);
  out.G_whitened = out.G_inv_sqrt * out.G_hat * out.G_inv_sqrt;
  out.G_whitened = 0.5 * (out.G_whitened + out.G_whitened.transpose().eval());
  return out;
}

GramMatrices gram_matrices(const Eigen::MatrixXd& design) {
  return gram_matrices(design, Eigen::MatrixXd::Identity(design.cols(), design.cols()));
}

}  // namespace qbcmr
