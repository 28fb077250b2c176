#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>

#include "qbcmr/prior.hpp"
#include "qbcmr/sieve.hpp"

namespace qbcmr {

/// Quasi-posterior over the truncated prior coefficients:
/// log density proportional to -(n/2) Q_n(h) against the Gaussian series prior.
struct QuasiPosteriorSpec {
  ObjectiveSpec objective;
  GaussianSeriesPrior prior;
  int n = 0;  // likelihood weight; normally the sample size of the fit
};

double log_quasi_likelihood(const QuasiPosteriorSpec& spec, const FunctionCoefficients& h);

/// Log quasi-likelihood as a function of standardized coordinates z
/// (h = prior transform of z). For npiv with h-independent weights the
/// objective is an exact quadratic in the coefficients and is precomputed
/// once, making each evaluation O(J^2) regardless of n.
using LogLikelihood = std::function<double(const Eigen::VectorXd&)>;
LogLikelihood make_log_quasi_likelihood(const QuasiPosteriorSpec& spec);

/// Q_n(theta) = c - 2 b'theta + theta' A theta over X-basis coefficients.
/// Valid for npiv with identity or fixed weights (residual linear in h).
struct QuadraticObjective {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  double c = 0.0;

  double value(const Eigen::VectorXd& theta) const;
};
QuadraticObjective quadratic_objective(const ObjectiveSpec& spec);

/// pCN chain state on standardized coordinates.
struct ChainState {
  Eigen::VectorXd z;
  double log_like = 0.0;
  double step = 0.5;  // beta in (0,1]
};

/// One prior-reversible Crank-Nicolson step:
/// z' = sqrt(1-beta^2) z + beta xi, accepted with probability
/// min(1, exp(loglike(z') - loglike(z))). Returns the new state and writes
/// the realized acceptance probability if asked.
ChainState pcn_step(const ChainState& state, const LogLikelihood& loglike, RngStream& rng,
                    double* accept_prob = nullptr, bool* accepted = nullptr);
ChainState pcn_step(const ChainState& state, const QuasiPosteriorSpec& spec, RngStream& rng);

struct ChainSettings {
  int iterations = 20000;
  int burn_in = 5000;
  int thin = 5;
  double target_accept = 0.25;
  double initial_step = 0.5;
  /// Optional functional (X-basis coefficients) tracked for the ESS summary.
  std::optional<Eigen::VectorXd> track;
};

/// Retained draws plus diagnostics.
struct ChainResult {
  SieveBasisSpec basis;
  Eigen::MatrixXd draws;  // one row per retained draw, h-space coefficients
  double accept_rate = 0.0;
  double ess_min = 0.0;
  double step_final = 0.0;
  std::uint64_t seed = 0;
  bool low_ess_warning = false;
};

/// Run a pCN chain against an arbitrary standardized log-likelihood. The
/// step size adapts toward target_accept during burn-in (Robbins-Monro on
/// log beta) and is frozen afterwards.
ChainResult run_chain(const LogLikelihood& loglike, const GaussianSeriesPrior& prior,
                      const ChainSettings& settings, std::uint64_t seed);

/// Convenience overload for a QuasiPosteriorSpec.
ChainResult run_chain(const QuasiPosteriorSpec& spec, const ChainSettings& settings,
                      std::uint64_t seed);

/// Coefficientwise average of the retained draws.
FunctionCoefficients posterior_mean(const ChainResult& chain);

/// Exact Gaussian quasi-posterior available when the residual is linear in h
/// (npiv) and the weights do not depend on h. With Lambda = diag(scale^2
/// lambda_i): mean = (nA + Lambda^{-1})^{-1} (n b), covariance = (nA +
/// Lambda^{-1})^{-1}.
struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};
GaussianPosterior exact_gaussian_posterior(const QuasiPosteriorSpec& spec);

}  // namespace qbcmr
