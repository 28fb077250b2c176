#include "qbcmr/pipeline.hpp"

#include <cmath>

#include "qbcmr/errors.hpp"

namespace qbcmr {

int FitConfig::resolve_K(int n) const {
  if (K > 0) return K;
  return select_K(n, alpha, ill_posedness, design.h0.basis.dim);
}

int FitConfig::resolve_J(int k) const {
  if (J > 0) return J;
  return std::max(4 * k, 64);
}

std::function<double(double)> limiting_weight(const DgpDesign& design, WeightingMode mode) {
  if (mode == WeightingMode::identity) return [](double) { return 1.0; };
  DgpDesign d = design;
  return [d](double w) { return 1.0 / d.residual_conditional_variance(w); };
}

namespace {

// Feasible pilot sigma_hat^2(w) for optimally weighted npiv: conjugate
// identity-weight fit, then squared residuals projected onto V_K. The pilot
// is undersmoothed (prior shrinkage weakened by 10x) so that shrinkage bias
// in h_pilot does not leak into the variance estimate.
std::function<double(const Eigen::VectorXd&)> pilot_variance_fn(
    const DgpDesign& design, std::shared_ptr<const FirstStageFit> fit, double alpha, int J) {
  SieveBasisSpec basisX{design.h0.basis.family, design.h0.basis.dim, J};
  ObjectiveSpec objective =
      make_objective(fit, design.model, WeightFunction::identity(), basisX);
  QuasiPosteriorSpec spec;
  spec.objective = objective;
  spec.prior = scaled_prior(alpha, J, fit->K, fit->n, basisX);
  spec.prior.scale *= 10.0;
  spec.n = fit->n;
  const GaussianPosterior pilot = exact_gaussian_posterior(spec);
  const FunctionCoefficients h_pilot(basisX, pilot.mean);

  const Eigen::VectorXd rho = residual_vector(fit->data, design.model, h_pilot);
  const Eigen::VectorXd rsq = rho.array().square();
  // Coefficients of the series regression of rho^2 on the whitened W basis.
  const Eigen::VectorXd coef =
      fit->whitened_gram_inv * (fit->whitened_design.transpose() * rsq / fit->n);
  auto fitptr = fit;
  return [fitptr, coef](const Eigen::VectorXd& w) {
    const double v = coef.dot(fitptr->whitened_basis(w));
    return std::clamp(v, kWeightClampLo, kWeightClampHi);
  };
}

}  // namespace

WeightFunction make_weighting(WeightingMode mode, const DgpDesign& design,
                              std::shared_ptr<const FirstStageFit> fit, double alpha, int J) {
  switch (mode) {
    case WeightingMode::identity:
      return WeightFunction::identity();
    case WeightingMode::fixed_oracle: {
      DgpDesign d = design;
      return WeightFunction::fixed([d](const Eigen::VectorXd& w) {
        return 1.0 / d.residual_conditional_variance(w[0]);
      });
    }
    case WeightingMode::optimal: {
      if (design.model.kind == ModelKind::npqiv)
        return WeightFunction::optimal({});  // variance known at the truth
      return WeightFunction::optimal(pilot_variance_fn(design, std::move(fit), alpha, J));
    }
    case WeightingMode::cu:
      return WeightFunction::cu({});  // default series estimator in the objective
  }
  return WeightFunction::identity();
}

FitResult fit_quasi_posterior(const FitConfig& config, const Dataset& data,
                              std::uint64_t chain_seed) {
  const int n = data.n();
  const int K = config.resolve_K(n);
  const int J = config.resolve_J(K);
  if (J < K) throw invalid_argument_error("fit_quasi_posterior: need J >= K");

  const SieveBasisSpec basisW{BasisFamily::cosine, static_cast<int>(data.W.cols()), K};
  const SieveBasisSpec basisX{config.design.h0.basis.family, config.design.h0.basis.dim, J};
  auto fit = std::make_shared<FirstStageFit>(first_stage_fit(data, basisW));

  const WeightFunction weights =
      make_weighting(config.weighting, config.design, fit, config.alpha, J);

  QuasiPosteriorSpec spec;
  spec.objective = make_objective(fit, config.design.model, weights, basisX);
  spec.prior = scaled_prior(config.alpha, J, K, n, basisX);
  spec.n = n;

  FitResult out;
  out.K = K;
  out.J = J;
  out.chain = run_chain(spec, config.chain, chain_seed);
  out.posterior_mean = posterior_mean(out.chain);
  return out;
}

}  // namespace qbcmr
