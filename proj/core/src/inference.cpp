#include "qbcmr/inference.hpp"

#include <cmath>

#include "qbcmr/errors.hpp"
#include "qbcmr/parallel.hpp"
#include "qbcmr/quadrature.hpp"
#include "qbcmr/stats.hpp"

namespace qbcmr {

namespace {
void check_same_basis(const SieveBasisSpec& a, const SieveBasisSpec& b, const char* where) {
  if (a.family != b.family || a.dim != b.dim)
    throw invalid_argument_error(std::string(where) + ": basis mismatch");
}

double padded_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index m = std::min(a.size(), b.size());
  return a.head(m).dot(b.head(m));
}
}  // namespace

double functional_value(const LinearFunctional& L, const FunctionCoefficients& h) {
  check_same_basis(L.phi.basis, h.basis, "functional_value");
  return padded_dot(L.phi.coeffs, h.coeffs);
}

double functional_value_weighted(const LinearFunctional& L, const FunctionCoefficients& h,
                                 const std::function<double(double)>& density_x,
                                 int quad_nodes) {
  check_same_basis(L.phi.basis, h.basis, "functional_value_weighted");
  if (L.phi.basis.dim != 1)
    throw invalid_argument_error("functional_value_weighted: univariate only");
  const QuadratureRule rule = gauss_legendre(quad_nodes, 0.0, 1.0);
  double acc = 0.0;
  for (int q = 0; q < quad_nodes; ++q) {
    const double x = rule.nodes[q];
    acc += rule.weights[q] * density_x(x) * eval_function(L.phi, x) * eval_function(h, x);
  }
  return acc;
}

LinearFunctional construct_functional_from_phitilde(
    const FrechetOperator& op, const FunctionCoefficients& phi_tilde,
    const std::function<double(double)>& sigma_limit) {
  check_same_basis(op.basisX, phi_tilde.basis, "construct_functional_from_phitilde");
  Eigen::VectorXd tilde = Eigen::VectorXd::Zero(op.basisX.size);
  tilde.head(std::min<Eigen::Index>(phi_tilde.coeffs.size(), tilde.size())) =
      phi_tilde.coeffs.head(std::min<Eigen::Index>(phi_tilde.coeffs.size(), tilde.size()));
  const Eigen::MatrixXd a = op.adjoint_composition(sigma_limit);
  LinearFunctional L;
  L.phi = FunctionCoefficients(op.basisX, a * tilde);
  L.phi_tilde = FunctionCoefficients(op.basisX, tilde);
  return L;
}

LinearFunctional construct_functional_from_phitilde(const DgpDesign& design,
                                                    const FunctionCoefficients& phi_tilde,
                                                    WeightingMode mode, int w_basis_size) {
  const SieveBasisSpec basisW{BasisFamily::cosine, 1, w_basis_size};
  const FrechetOperator op = frechet_operator_matrix(design, phi_tilde.basis, basisW);
  return construct_functional_from_phitilde(op, phi_tilde, limiting_weight(design, mode));
}

CredibleInterval credible_interval(const ChainResult& chain, const LinearFunctional& L,
                                   double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw invalid_argument_error("credible_interval: gamma must be in (0,1)");
  if (chain.draws.rows() < 20)
    throw invalid_argument_error("credible_interval: insufficient draws (< 20 retained)");
  check_same_basis(chain.basis, L.phi.basis, "credible_interval");

  const FunctionCoefficients mean = posterior_mean(chain);
  CredibleInterval ci;
  ci.gamma = gamma;
  ci.center = functional_value(L, mean);
  const Eigen::Index m = std::min<Eigen::Index>(L.phi.coeffs.size(), chain.draws.cols());
  const Eigen::VectorXd lvals = chain.draws.leftCols(m) * L.phi.coeffs.head(m);
  std::vector<double> devs(lvals.size());
  for (Eigen::Index i = 0; i < lvals.size(); ++i) devs[i] = std::abs(lvals[i] - ci.center);
  ci.radius = quantile_type7(std::move(devs), 1.0 - gamma);
  return ci;
}

VarianceOracle asymptotic_variance_oracle(const DgpDesign& design, const FrechetOperator& op,
                                          const LinearFunctional& L, WeightingMode mode) {
  if (!L.phi_tilde.has_value())
    throw invalid_argument_error("asymptotic_variance_oracle: functional lacks phi_tilde");
  const Eigen::VectorXd dphi = op.apply(L.phi_tilde->coeffs);
  const std::function<double(double)> sigma = limiting_weight(design, mode);
  VarianceOracle out;
  for (int q = 0; q < op.w_nodes.size(); ++q) {
    const double w = op.w_nodes[q];
    const double s = sigma(w);
    const double rho_var = design.residual_conditional_variance(w);
    const double d2 = dphi[q] * dphi[q];
    out.posterior_spread += op.w_weights[q] * d2 * s;
    out.sampling += op.w_weights[q] * d2 * s * rho_var * s;
  }
  return out;
}

CoverageResult coverage_study(const CoverageConfig& config) {
  if (config.replications < 1)
    throw invalid_argument_error("coverage_study: need at least one replication");
  const FitConfig& fc = config.fit;
  const int K = fc.resolve_K(config.n);
  const int J = fc.resolve_J(K);

  // The functional is built once from the population operator with the
  // limiting weight of the configured mode.
  SieveBasisSpec basisX = fc.design.h0.basis;
  basisX.size = J;
  FunctionCoefficients tilde(basisX, [&] {
    Eigen::VectorXd padded = Eigen::VectorXd::Zero(J);
    const Eigen::Index m = std::min<Eigen::Index>(config.phi_tilde.coeffs.size(), J);
    padded.head(m) = config.phi_tilde.coeffs.head(m);
    return padded;
  }());
  const LinearFunctional L =
      construct_functional_from_phitilde(fc.design, tilde, fc.weighting, K);

  Eigen::VectorXd truth = Eigen::VectorXd::Zero(J);
  {
    const Eigen::Index m = std::min<Eigen::Index>(fc.design.h0.coeffs.size(), J);
    truth.head(m) = fc.design.h0.coeffs.head(m);
  }
  const double l_h0 = padded_dot(L.phi.coeffs, truth);

  CoverageResult result;
  result.functional = L;
  result.l_h0 = l_h0;
  result.records.resize(config.replications);

  parallel_for_index(config.replications, config.workers, [&](int r) {
    const std::uint64_t rep_seed = split_seed(config.base_seed, static_cast<std::uint64_t>(r));
    try {
      RngStream data_rng = make_stream(rep_seed, 0);
      const Dataset data = simulate_dgp(fc.design, config.n, data_rng);

      FitConfig local = fc;
      local.K = K;
      local.J = J;
      local.chain.track = L.phi.coeffs;
      const FitResult fitted = fit_quasi_posterior(local, data, split_seed(rep_seed, 1));

      const CredibleInterval ci = credible_interval(fitted.chain, L, config.gamma);
      ReplicationRecord rec;
      rec.replication = r;
      rec.seed = rep_seed;
      rec.l_h0 = l_h0;
      rec.center = ci.center;
      rec.radius = ci.radius;
      rec.hit = ci.contains(l_h0);
      rec.accept_rate = fitted.chain.accept_rate;
      rec.ess_min = fitted.chain.ess_min;
      rec.error_l2 = (fitted.posterior_mean.coeffs - truth).norm();
      result.records[r] = rec;
    } catch (const std::exception& e) {
      throw replication_error(r, rep_seed, e.what());
    }
  });

  double hits = 0.0;
  for (const auto& rec : result.records) hits += rec.hit ? 1.0 : 0.0;
  result.coverage = hits / config.replications;
  result.std_error =
      std::sqrt(result.coverage * (1.0 - result.coverage) / config.replications);
  return result;
}

}  // namespace qbcmr
