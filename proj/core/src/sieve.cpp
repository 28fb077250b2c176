#include "qbcmr/sieve.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "qbcmr/errors.hpp"

namespace qbcmr {

Eigen::VectorXd FirstStageFit::whitened_basis(const Eigen::VectorXd& w) const {
  Eigen::VectorXd b(K);
  for (int j = 1; j <= K; ++j) b[j - 1] = eval_basis(basisW, j, w);
  return gram.G_inv_sqrt * b;
}

FirstStageFit first_stage_fit(const Dataset& data, const SieveBasisSpec& basisW) {
  data.validate();
  if (data.n() <= basisW.size)
    throw invalid_argument_error("first_stage_fit: need n > K");
  FirstStageFit fit;
  fit.basisW = basisW;
  fit.data = data;
  fit.n = data.n();
  fit.K = basisW.size;
  const Eigen::MatrixXd design = design_matrix(basisW, data.W);
  fit.gram = gram_matrices(design, population_gram(basisW));
  fit.whitened_design = design * fit.gram.G_inv_sqrt;
  fit.whitened_gram_inv = fit.gram.G_whitened.ldlt().solve(
      Eigen::MatrixXd::Identity(fit.K, fit.K));
  return fit;
}

Eigen::VectorXd residual_vector(const Dataset& data, const MomentModel& model,
                                const FunctionCoefficients& h) {
  const int n = data.n();
  Eigen::VectorXd rho(n);
  for (int i = 0; i < n; ++i) {
    const double hx = eval_function(h, Eigen::VectorXd(data.X.row(i).transpose()));
    rho[i] = residual_scalar(model, data.Y[i], hx);
  }
  return rho;
}

Eigen::VectorXd mhat(const FirstStageFit& fit, const MomentModel& model,
                     const FunctionCoefficients& h, const Eigen::VectorXd& w) {
  const Eigen::VectorXd rho = residual_vector(fit.data, model, h);
  const Eigen::VectorXd r = fit.whitened_design.transpose() * rho / fit.n;
  Eigen::VectorXd out(model.d_rho);
  out[0] = r.dot(fit.whitened_gram_inv * fit.whitened_basis(w));
  return out;
}

Eigen::VectorXd mhat_at_sample(const FirstStageFit& fit, const Eigen::VectorXd& residuals) {
  const Eigen::VectorXd r = fit.whitened_design.transpose() * residuals / fit.n;
  return fit.whitened_design * (fit.whitened_gram_inv * r);
}

ObjectiveSpec make_objective(std::shared_ptr<const FirstStageFit> fit, const MomentModel& model,
                             const WeightFunction& weights, const SieveBasisSpec& basisX) {
  if (!fit) throw invalid_argument_error("make_objective: missing first-stage fit");
  ObjectiveSpec spec;
  spec.fit = std::move(fit);
  spec.model = model;
  spec.weights = weights;
  spec.basisX = basisX;
  spec.x_design = design_matrix(basisX, spec.fit->data.X);
  return spec;
}

namespace {

Eigen::VectorXd residuals_cached(const ObjectiveSpec& spec, const FunctionCoefficients& h) {
  if (h.basis == spec.basisX) {
    const Eigen::VectorXd hvals = spec.x_design * h.coeffs;
    const Eigen::VectorXd& y = spec.fit->data.Y;
    Eigen::VectorXd rho(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
      rho[i] = residual_scalar(spec.model, y[i], hvals[i]);
    return rho;
  }
  return residual_vector(spec.fit->data, spec.model, h);
}

// Series projection of a sample vector onto V_K, fitted values at the data.
Eigen::VectorXd project_fitted(const FirstStageFit& fit, const Eigen::VectorXd& values) {
  const Eigen::VectorXd r = fit.whitened_design.transpose() * values / fit.n;
  return fit.whitened_design * (fit.whitened_gram_inv * r);
}

}  // namespace

double quasi_objective_with_residuals(const ObjectiveSpec& spec, const Eigen::VectorXd& rho,
                                      const FunctionCoefficients& h) {
  const FirstStageFit& fit = *spec.fit;
  const Eigen::VectorXd r = fit.whitened_design.transpose() * rho / fit.n;

  if (spec.weights.mode == WeightFunction::Mode::identity)
    return r.dot(fit.whitened_gram_inv * r);

  const Eigen::VectorXd mvals = fit.whitened_design * (fit.whitened_gram_inv * r);

  if (spec.weights.mode == WeightFunction::Mode::cu && !spec.weights.cu_variance) {
    // Default CU estimator: project rho^2 onto V_K, invert, clamp.
    const Eigen::VectorXd varfit = project_fitted(fit, rho.array().square().matrix());
    double acc = 0.0;
    for (int i = 0; i < fit.n; ++i) {
      const double sig = std::clamp(1.0 / std::max(varfit[i], 1e-300), kWeightClampLo,
                                    kWeightClampHi);
      acc += sig * mvals[i] * mvals[i];
    }
    return acc / fit.n;
  }

  double acc = 0.0;
  for (int i = 0; i < fit.n; ++i) {
    const Eigen::VectorXd wi = fit.data.W.row(i).transpose();
    const double sig = weight_at(spec.weights, spec.model, wi, &h);
    acc += sig * mvals[i] * mvals[i];
  }
  return acc / fit.n;
}

double quasi_objective(const ObjectiveSpec& spec, const FunctionCoefficients& h) {
  return quasi_objective_with_residuals(spec, residuals_cached(spec, h), h);
}

int select_K(int n, double alpha, const WeakNormWeights& weights, int d) {
  if (n < 2) throw invalid_argument_error("select_K: n must be >= 2");
  if (!(alpha > 0.0)) throw invalid_argument_error("select_K: alpha must be > 0");
  const double root_n = std::sqrt(static_cast<double>(n));
  int best = 1;
  for (int K = 1; K <= n; ++K) {
    const double lhs = std::sqrt(static_cast<double>(K)) / root_n;
    const double rhs = weights.sigma(K) * std::pow(static_cast<double>(K), -alpha / d);
    if (lhs <= rhs)
      best = K;
    else
      break;
  }
  return best;
}

}  // namespace qbcmr
