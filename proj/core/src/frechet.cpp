#include "qbcmr/frechet.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "qbcmr/errors.hpp"
#include "qbcmr/quadrature.hpp"
#include "qbcmr/stats.hpp"

namespace qbcmr {

namespace {

// Density of the structural error at zero given the latent V coordinate.
double u_kernel(const DgpDesign& design, double uv, double w) {
  const double e = design.endogeneity;
  const double se = std::sqrt(1.0 - e * e);
  const double zg = normal_quantile(design.model.gamma);
  return normal_pdf((zg - e * uv) / se) / (design.noise_scale(w) * se);
}

// D[e_i](w) for all i <= J at one w, by quadrature over x. The integrals run
// over the latent normal coordinate wherever the integrand is smoother there:
// the Gaussian copula always, and the npqiv kernel (whose conditional error
// density depends on Phi^{-1} of the conditional CDF) for any copula.
Eigen::VectorXd d_row(const DgpDesign& design, const SieveBasisSpec& basisX, double w,
                      int inner_nodes) {
  const int J = basisX.size;
  Eigen::VectorXd row = Eigen::VectorXd::Zero(J);
  const bool quantile_model = design.model.kind == ModelKind::npqiv;
  const bool gaussian_copula =
      design.copula.kind == CopulaSpec::Kind::gaussian && design.copula.strength > 0.0;

  if (gaussian_copula) {
    // x = Phi(z), z | w ~ N(r Phi^{-1}(w), 1 - r^2); the latent V coordinate
    // is uv = (z - r Phi^{-1}(w)) / sqrt(1 - r^2).
    const double r = design.copula.strength;
    const double s = std::sqrt(1.0 - r * r);
    const double zw = normal_quantile(std::clamp(w, 1e-14, 1.0 - 1e-14));
    const QuadratureRule rule = gauss_legendre(inner_nodes, r * zw - 8.5 * s, r * zw + 8.5 * s);
    for (int q = 0; q < inner_nodes; ++q) {
      const double z = rule.nodes[q];
      const double x = std::clamp(normal_cdf(z), 0.0, 1.0);
      double kern = normal_pdf((z - r * zw) / s) / s;
      if (quantile_model) kern *= u_kernel(design, (z - r * zw) / s, w);
      const double wt = rule.weights[q] * kern;
      for (int i = 1; i <= J; ++i) row[i - 1] += wt * eval_basis(basisX, i, x);
    }
  } else if (quantile_model) {
    // x = F^{-1}(Phi(z) | w) makes uv = z exactly and the integrand a product
    // of Gaussian factors with an analytic composition.
    const QuadratureRule rule = gauss_legendre(inner_nodes, -8.5, 8.5);
    for (int q = 0; q < inner_nodes; ++q) {
      const double z = rule.nodes[q];
      const double x = design.conditional_quantile(normal_cdf(z), w);
      const double wt = rule.weights[q] * normal_pdf(z) * u_kernel(design, z, w);
      for (int i = 1; i <= J; ++i) row[i - 1] += wt * eval_basis(basisX, i, x);
    }
  } else {
    const QuadratureRule rule = gauss_legendre(inner_nodes, 0.0, 1.0);
    for (int q = 0; q < inner_nodes; ++q) {
      const double x = rule.nodes[q];
      const double wt = rule.weights[q] * design.conditional_density(x, w);
      for (int i = 1; i <= J; ++i) row[i - 1] += wt * eval_basis(basisX, i, x);
    }
  }
  // npiv: D[h] = -E[h(X)|W]; npqiv derivative enters with positive sign.
  return quantile_model ? row : Eigen::VectorXd(-row);
}

FrechetOperator build_level(const DgpDesign& design, const SieveBasisSpec& basisX,
                            const SieveBasisSpec& basisW, int outer_nodes, int inner_nodes) {
  FrechetOperator op;
  op.basisX = basisX;
  op.basisW = basisW;
  const QuadratureRule rule = gauss_legendre(outer_nodes, 0.0, 1.0);
  op.w_nodes = rule.nodes;
  op.w_weights = rule.weights;
  op.d_values.resize(outer_nodes, basisX.size);
  for (int q = 0; q < outer_nodes; ++q)
    op.d_values.row(q) = d_row(design, basisX, rule.nodes[q], inner_nodes).transpose();

  Eigen::MatrixXd b_vals(outer_nodes, basisW.size);
  for (int q = 0; q < outer_nodes; ++q)
    for (int j = 1; j <= basisW.size; ++j) b_vals(q, j - 1) = eval_basis(basisW, j, rule.nodes[q]);
  op.matrix = op.d_values.transpose() * op.w_weights.asDiagonal() * b_vals;
  return op;
}

}  // namespace

Eigen::VectorXd FrechetOperator::apply(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() > d_values.cols())
    throw invalid_argument_error("FrechetOperator::apply: coefficient vector too long");
  return d_values.leftCols(coeffs.size()) * coeffs;
}

Eigen::MatrixXd FrechetOperator::adjoint_composition() const {
  return d_values.transpose() * w_weights.asDiagonal() * d_values;
}

Eigen::MatrixXd FrechetOperator::adjoint_composition(
    const std::function<double(double)>& sigma) const {
  Eigen::VectorXd wts = w_weights;
  for (int q = 0; q < wts.size(); ++q) {
    const double s = sigma(w_nodes[q]);
    if (!(s > 0.0)) throw numerical_error("adjoint_composition: weights must be positive");
    wts[q] *= s;
  }
  return d_values.transpose() * wts.asDiagonal() * d_values;
}

Eigen::VectorXd FrechetOperator::singular_values() const {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(matrix).singularValues();
}

FrechetOperator frechet_operator_matrix(const DgpDesign& design, const SieveBasisSpec& basisX,
                                        const SieveBasisSpec& basisW) {
  design.validate();
  if (basisX.dim != 1 || basisW.dim != 1)
    throw invalid_argument_error("frechet_operator_matrix: built-in designs are univariate");
  const FrechetOperator coarse = build_level(design, basisX, basisW, 120, 160);
  FrechetOperator fine = build_level(design, basisX, basisW, 240, 320);
  const double diff = (coarse.matrix - fine.matrix).cwiseAbs().maxCoeff();
  if (diff > 1e-6)
    throw numerical_error("frechet_operator_matrix: quadrature non-convergence (diff " +
                          std::to_string(diff) + ")");
  return fine;
}

IllPosedness classify_illposedness(const Eigen::VectorXd& singular_values) {
  std::vector<double> logs;
  std::vector<double> idx;
  for (int k = 1; k < singular_values.size(); ++k) {  // skip the constant channel
    const double s = singular_values[k];
    if (s > 1e-12) {
      logs.push_back(std::log(s));
      idx.push_back(static_cast<double>(k + 1));
    }
  }
  if (logs.size() < 3)
    throw invalid_argument_error("classify_illposedness: need at least 3 usable values");

  const Eigen::Index m = static_cast<Eigen::Index>(logs.size());
  Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(logs.data(), m);
  Eigen::VectorXd k_lin = Eigen::Map<Eigen::VectorXd>(idx.data(), m);
  Eigen::VectorXd k_log = k_lin.array().log();

  auto r2 = [&](const Eigen::VectorXd& x) {
    const double b = ls_slope(x, y);
    const double a = y.mean() - b * x.mean();
    const Eigen::VectorXd res = y - (a + (b * x.array()).matrix().array()).matrix();
    const double sst = (y.array() - y.mean()).matrix().squaredNorm();
    return sst <= 0.0 ? 1.0 : 1.0 - res.squaredNorm() / sst;
  };
  return r2(k_log) >= r2(k_lin) ? IllPosedness::mild : IllPosedness::severe;
}

}  // namespace qbcmr
