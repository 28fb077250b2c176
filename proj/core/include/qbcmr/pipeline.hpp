#pragma once

#include <cstdint>

#include "qbcmr/frechet.hpp"
#include "qbcmr/posterior.hpp"

namespace qbcmr {

enum class WeightingMode { identity, fixed_oracle, optimal, cu };

/// One full estimation setup: prior regularity, sieve dimensions (0 = rule
/// based), weighting policy and chain budget.
struct FitConfig {
  DgpDesign design;
  double alpha = 1.0;
  int K = 0;  // 0: select_K from (n, alpha, ill_posedness)
  int J = 0;  // 0: max(4K, 64)
  WeightingMode weighting = WeightingMode::identity;
  WeakNormWeights ill_posedness = WeakNormWeights::mild(1.0);
  ChainSettings chain;

  int resolve_K(int n) const;
  int resolve_J(int K) const;
};

struct FitResult {
  FunctionCoefficients posterior_mean;
  ChainResult chain;
  int K = 0;
  int J = 0;
};

/// Oracle limiting weight Sigma(w) implied by a weighting mode on a design:
/// identity -> 1, other modes -> 1 / E[rho^2 | W = w] at the truth.
std::function<double(double)> limiting_weight(const DgpDesign& design, WeightingMode mode);

/// Build the weighting policy for a dataset. `optimal` estimates a pilot
/// conditional variance feasibly: an identity-weight conjugate (npiv) pilot
/// fit followed by a series regression of squared residuals on the W basis.
WeightFunction make_weighting(WeightingMode mode, const DgpDesign& design,
                              std::shared_ptr<const FirstStageFit> fit, double alpha, int J);

/// simulate -> first stage -> weights -> prior -> chain -> posterior mean.
FitResult fit_quasi_posterior(const FitConfig& config, const Dataset& data,
                              std::uint64_t chain_seed);

}  // namespace qbcmr
