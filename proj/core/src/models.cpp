#include "qbcmr/models.hpp"

#include <cmath>
#include <numbers>

#include "qbcmr/errors.hpp"
#include "qbcmr/stats.hpp"

namespace qbcmr {

MomentModel MomentModel::npiv() {
  MomentModel m;
  m.kind = ModelKind::npiv;
  m.kappa = 1.0;
  return m;
}

MomentModel MomentModel::npqiv(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw invalid_argument_error("MomentModel::npqiv: gamma must be in (0,1)");
  MomentModel m;
  m.kind = ModelKind::npqiv;
  m.gamma = gamma;
  m.kappa = 0.5;
  return m;
}

Eigen::VectorXd residual(const MomentModel& model, double y, double h_at_x) {
  Eigen::VectorXd r(model.d_rho);
  r[0] = residual_scalar(model, y, h_at_x);
  return r;
}

void Dataset::validate() const {
  const Eigen::Index n = Y.size();
  if (n < 1) throw invalid_argument_error("Dataset: empty");
  if (X.rows() != n || W.rows() != n)
    throw invalid_argument_error("Dataset: X, Y, W lengths differ");
  if ((X.array() < 0.0).any() || (X.array() > 1.0).any())
    throw invalid_argument_error("Dataset: X outside the unit cube");
  if ((W.array() < 0.0).any() || (W.array() > 1.0).any())
    throw invalid_argument_error("Dataset: W outside the unit cube");
}

void CopulaSpec::validate() const {
  if (kind == Kind::gaussian) {
    if (!(strength >= 0.0 && strength < 1.0))
      throw invalid_argument_error("CopulaSpec: gaussian correlation must be in [0,1)");
    return;
  }
  if (!(strength >= 0.0 && strength <= 1.0))
    throw invalid_argument_error("CopulaSpec: cosine amplitude must be in [0,1]");
  if (terms < 1) throw invalid_argument_error("CopulaSpec: terms must be >= 1");
  if (zeta < 0.0) throw invalid_argument_error("CopulaSpec: zeta must be >= 0");
  // Density positivity: f >= 1 - 2 sum |tau_k| must stay above a floor.
  double mass = 0.0;
  for (int k = 2; k <= terms; ++k) mass += 2.0 * std::abs(tau(k));
  if (mass > 0.99)
    throw invalid_argument_error(
        "CopulaSpec: cosine mixture too strong, conditional density can touch zero");
}

double CopulaSpec::tau(int k) const {
  if (k < 1) throw invalid_argument_error("CopulaSpec::tau: k must be >= 1");
  if (k == 1) return 1.0;
  if (kind == Kind::gaussian || k > terms) return 0.0;
  return strength * std::pow(static_cast<double>(k), -zeta);
}

void DgpDesign::validate() const {
  copula.validate();
  if (h0.basis.dim != 1)
    throw invalid_argument_error("DgpDesign: built-in designs are univariate (d = 1)");
  if (h0.basis.family != BasisFamily::cosine)
    throw invalid_argument_error("DgpDesign: truth must live on the cosine basis");
  if (!(endogeneity >= -1.0 && endogeneity <= 1.0))
    throw invalid_argument_error("DgpDesign: endogeneity must be in [-1,1]");
  if (noise_sd < 0.0) throw invalid_argument_error("DgpDesign: noise_sd must be >= 0");
  if (model.kind == ModelKind::npqiv && noise_sd == 0.0)
    throw invalid_argument_error("DgpDesign: npqiv needs a continuous error, noise_sd > 0");
  if (std::abs(het_slope) >= 2.0)
    throw invalid_argument_error("DgpDesign: |het_slope| must be < 2 so sd(w) stays positive");
}

namespace {
// Unit-norm cosine element e_k on [0,1] (k >= 2 is nonconstant).
double cos_e(int k, double x) {
  if (k == 1) return 1.0;
  return std::numbers::sqrt2 * std::cos(std::numbers::pi * (k - 1) * x);
}
// Antiderivative of e_k from 0 to x.
double cos_e_int(int k, double x) {
  if (k == 1) return x;
  return std::numbers::sqrt2 * std::sin(std::numbers::pi * (k - 1) * x) /
         (std::numbers::pi * (k - 1));
}
}  // namespace

double DgpDesign::conditional_density(double x, double w) const {
  if (copula.kind == CopulaSpec::Kind::gaussian) {
    const double r = copula.strength;
    if (r == 0.0) return 1.0;
    const double zx = normal_quantile(std::clamp(x, 1e-14, 1.0 - 1e-14));
    const double zw = normal_quantile(std::clamp(w, 1e-14, 1.0 - 1e-14));
    const double s = std::sqrt(1.0 - r * r);
    return normal_pdf((zx - r * zw) / s) / (s * normal_pdf(zx));
  }
  double f = 1.0;
  for (int k = 2; k <= copula.terms; ++k) f += copula.tau(k) * cos_e(k, x) * cos_e(k, w);
  return f;
}

double DgpDesign::conditional_cdf(double x, double w) const {
  if (copula.kind == CopulaSpec::Kind::gaussian) {
    const double r = copula.strength;
    if (r == 0.0) return x;
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double zx = normal_quantile(x);
    const double zw = normal_quantile(std::clamp(w, 1e-14, 1.0 - 1e-14));
    return normal_cdf((zx - r * zw) / std::sqrt(1.0 - r * r));
  }
  double F = x;
  for (int k = 2; k <= copula.terms; ++k) F += copula.tau(k) * cos_e_int(k, x) * cos_e(k, w);
  return std::clamp(F, 0.0, 1.0);
}

double DgpDesign::conditional_quantile(double v, double w) const {
  if (!(v >= 0.0 && v <= 1.0))
    throw invalid_argument_error("conditional_quantile: v must be in [0,1]");
  if (copula.kind == CopulaSpec::Kind::gaussian) {
    const double r = copula.strength;
    if (r == 0.0 || v <= 0.0 || v >= 1.0) return std::clamp(v, 0.0, 1.0);
    const double zw = normal_quantile(std::clamp(w, 1e-14, 1.0 - 1e-14));
    return normal_cdf(r * zw + std::sqrt(1.0 - r * r) * normal_quantile(v));
  }
  // Monotone root of F(x|w) = v: Newton damped by bisection.
  double lo = 0.0, hi = 1.0, x = v;
  for (int it = 0; it < 100; ++it) {
    const double F = conditional_cdf(x, w);
    if (F > v)
      hi = x;
    else
      lo = x;
    const double f = conditional_density(x, w);
    double step = (F - v) / std::max(f, 1e-3);
    double next = x - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-14) return next;
    x = next;
  }
  return x;
}

double DgpDesign::noise_scale(double w) const {
  return noise_sd * (1.0 + het_slope * (w - 0.5));
}

double DgpDesign::residual_conditional_variance(double w) const {
  if (model.kind == ModelKind::npiv) {
    const double s = noise_scale(w);
    return s * s;
  }
  return model.gamma * (1.0 - model.gamma);
}

double DgpDesign::latent_uv(double x, double w) const {
  const double v = std::clamp(conditional_cdf(x, w), 1e-14, 1.0 - 1e-14);
  return normal_quantile(v);
}

double DgpDesign::u_density_at_zero(double x, double w) const {
  if (model.kind != ModelKind::npqiv)
    throw invalid_argument_error("u_density_at_zero: only defined for npqiv");
  const double e = endogeneity;
  const double se = std::sqrt(1.0 - e * e);
  const double zg = normal_quantile(model.gamma);
  const double uv = latent_uv(x, w);
  return normal_pdf((zg - e * uv) / se) / (noise_scale(w) * se);
}

Dataset simulate_dgp(const DgpDesign& design, int n, RngStream& rng) {
  if (n < 1) throw invalid_argument_error("simulate_dgp: n must be >= 1");
  design.validate();

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double e = design.endogeneity;
  const double se = std::sqrt(1.0 - e * e);
  const bool quantile_model = design.model.kind == ModelKind::npqiv;
  const double zg = quantile_model ? normal_quantile(design.model.gamma) : 0.0;

  Dataset data;
  data.X.resize(n, 1);
  data.Y.resize(n);
  data.W.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    const double w = unif(rng);
    const double v = std::clamp(unif(rng), 1e-14, 1.0 - 1e-14);
    const double x = design.conditional_quantile(v, w);
    const double uv = normal_quantile(v);
    const double t = e * uv + se * gauss(rng);
    const double u = design.noise_scale(w) * (quantile_model ? (t - zg) : t);
    data.W(i, 0) = w;
    data.X(i, 0) = std::clamp(x, 0.0, 1.0);
    data.Y[i] = eval_function(design.h0, data.X(i, 0)) + u;
  }
  return data;
}

WeightFunction WeightFunction::identity() {
  WeightFunction wf;
  wf.mode = Mode::identity;
  return wf;
}

WeightFunction WeightFunction::fixed(std::function<double(const Eigen::VectorXd&)> sigma) {
  if (!sigma) throw invalid_argument_error("WeightFunction::fixed: missing weight function");
  WeightFunction wf;
  wf.mode = Mode::fixed;
  wf.fixed_weight = std::move(sigma);
  return wf;
}

WeightFunction WeightFunction::optimal(std::function<double(const Eigen::VectorXd&)> pilot) {
  WeightFunction wf;
  wf.mode = Mode::optimal;
  wf.pilot_variance = std::move(pilot);
  return wf;
}

WeightFunction WeightFunction::cu(
    std::function<double(const Eigen::VectorXd&, const FunctionCoefficients&)> variance) {
  WeightFunction wf;
  wf.mode = Mode::cu;
  wf.cu_variance = std::move(variance);
  return wf;
}

double weight_at(const WeightFunction& wf, const MomentModel& model, const Eigen::VectorXd& w,
                 const FunctionCoefficients* h) {
  switch (wf.mode) {
    case WeightFunction::Mode::identity:
      return 1.0;
    case WeightFunction::Mode::fixed: {
      const double s = wf.fixed_weight(w);
      if (!(s > 0.0)) throw numerical_error("weight_at: fixed weight must be positive");
      return s;
    }
    case WeightFunction::Mode::optimal: {
      if (model.kind == ModelKind::npqiv)
        return std::clamp(1.0 / (model.gamma * (1.0 - model.gamma)), kWeightClampLo,
                          kWeightClampHi);
      if (!wf.pilot_variance)
        throw invalid_argument_error("weight_at: optimal npiv weighting requires a pilot");
      return std::clamp(1.0 / std::max(wf.pilot_variance(w), 1e-300), kWeightClampLo,
                        kWeightClampHi);
    }
    case WeightFunction::Mode::cu: {
      if (!wf.cu_variance)
        throw invalid_argument_error("weight_at: cu weighting requires a variance estimator");
      if (h == nullptr)
        throw invalid_argument_error("weight_at: cu weighting requires the current h");
      return std::clamp(1.0 / std::max(wf.cu_variance(w, *h), 1e-300), kWeightClampLo,
                        kWeightClampHi);
    }
  }
  return 1.0;  // unreachable
}

}  // namespace qbcmr
