#pragma once

#include <optional>
#include <vector>

#include "qbcmr/pipeline.hpp"

namespace qbcmr {

/// A continuous linear functional L(h) = <h, Phi> via its Riesz representer.
/// When built from a design through the source condition Phi = D* D Phi_tilde
/// the representer's preimage is kept for variance computations. Arbitrary
/// user representers are accepted everywhere, but the frequentist coverage
/// guarantees of credible intervals require the source condition to hold;
/// prefer construct_functional_from_phitilde for experiments.
struct LinearFunctional {
  FunctionCoefficients phi;
  std::optional<FunctionCoefficients> phi_tilde;
};

/// <h, Phi>: under the uniform design density this is the coefficient inner
/// product (shorter vector zero-padded). Requires the same basis family/dim.
double functional_value(const LinearFunctional& L, const FunctionCoefficients& h);

/// Coefficient inner product with a density-weighting correction matrix for
/// non-uniform X densities: <Phi, h>_{L2(P)} = phi' Wf h with
/// (Wf)_{ij} = int e_i e_j f_X, computed by quadrature.
double functional_value_weighted(const LinearFunctional& L, const FunctionCoefficients& h,
                                 const std::function<double(double)>& density_x,
                                 int quad_nodes = 400);

/// Build L from Phi_tilde so the source condition holds by construction:
/// Phi = (D* Sigma D) Phi_tilde, the adjoint taken in the Sigma-weighted
/// codomain inner product.
LinearFunctional construct_functional_from_phitilde(
    const FrechetOperator& op, const FunctionCoefficients& phi_tilde,
    const std::function<double(double)>& sigma_limit);

/// Convenience: builds the operator for the design (basis dimensions J = the
/// phi_tilde basis size, K = w_basis_size) and the limiting weight of `mode`.
LinearFunctional construct_functional_from_phitilde(const DgpDesign& design,
                                                    const FunctionCoefficients& phi_tilde,
                                                    WeightingMode mode, int w_basis_size);

/// Quasi-Bayes credible interval centred at L(posterior mean) with radius the
/// empirical (1-gamma) quantile (inclusive, type-7) of |L(h) - center|.
struct CredibleInterval {
  double center = 0.0;
  double radius = 0.0;
  double gamma = 0.1;

  bool contains(double value) const { return std::abs(value - center) <= radius; }
};

CredibleInterval credible_interval(const ChainResult& chain, const LinearFunctional& L,
                                   double gamma);

/// The two limiting variances of sqrt(n) L(h):
///   posterior_spread = E[(D Phi_tilde)' Sigma (D Phi_tilde)]         (BvM spread)
///   sampling         = E[(D Phi_tilde)' Sigma rho rho' Sigma (D Phi_tilde)]
/// They coincide (= sigma^2_Phi) exactly under optimal weighting.
struct VarianceOracle {
  double posterior_spread = 0.0;
  double sampling = 0.0;
};

VarianceOracle asymptotic_variance_oracle(const DgpDesign& design, const FrechetOperator& op,
                                          const LinearFunctional& L, WeightingMode mode);

/// Monte Carlo coverage study of C_n(gamma) for L(h0).
struct CoverageConfig {
  FitConfig fit;
  FunctionCoefficients phi_tilde;
  double gamma = 0.10;  // significance level of the interval
  int n = 1000;
  int replications = 200;
  std::uint64_t base_seed = 1;
  int workers = 1;
};

struct ReplicationRecord {
  int replication = 0;
  std::uint64_t seed = 0;
  double l_h0 = 0.0;
  double center = 0.0;
  double radius = 0.0;
  bool hit = false;
  double accept_rate = 0.0;
  double ess_min = 0.0;
  double error_l2 = 0.0;  // coefficient-space L2 error of the posterior mean
};

struct CoverageResult {
  std::vector<ReplicationRecord> records;
  double coverage = 0.0;
  double std_error = 0.0;
  double l_h0 = 0.0;
  LinearFunctional functional;
};

/// Runs R replications (simulate, fit, chain, interval) with per-replication
/// split seeds on a bounded worker pool; aggregation is order-independent.
/// A hard failure in replication r aborts with a replication_error naming r.
CoverageResult coverage_study(const CoverageConfig& config);

}  // namespace qbcmr
