#include "qbcmr/posterior.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "qbcmr/errors.hpp"
#include "qbcmr/stats.hpp"

namespace qbcmr {

double log_quasi_likelihood(const QuasiPosteriorSpec& spec, const FunctionCoefficients& h) {
  return -0.5 * spec.n * quasi_objective(spec.objective, h);
}

double QuadraticObjective::value(const Eigen::VectorXd& theta) const {
  return c - 2.0 * b.dot(theta) + theta.dot(A * theta);
}

QuadraticObjective quadratic_objective(const ObjectiveSpec& spec) {
  if (spec.model.kind != ModelKind::npiv)
    throw invalid_argument_error("quadratic_objective: residual must be linear in h (npiv)");
  if (spec.continuously_updated())
    throw invalid_argument_error("quadratic_objective: not available in CU mode");

  const FirstStageFit& fit = *spec.fit;
  const int n = fit.n;
  // rho(theta) = Y - X_design theta; r(theta) = r_Y - M theta with
  // M = (1/n) U' X_design, so mhat at the sample is affine in theta.
  const Eigen::VectorXd r_y = fit.whitened_design.transpose() * fit.data.Y / n;
  const Eigen::MatrixXd m = fit.whitened_design.transpose() * spec.x_design / n;

  Eigen::VectorXd sig = Eigen::VectorXd::Ones(n);
  if (spec.weights.mode != WeightFunction::Mode::identity) {
    for (int i = 0; i < n; ++i)
      sig[i] = weight_at(spec.weights, spec.model, fit.data.W.row(i).transpose());
  }

  if (spec.weights.mode == WeightFunction::Mode::identity) {
    // E_n|mhat|^2 = r' [G_whitened]^{-1} r, exact quadratic in theta.
    QuadraticObjective q;
    q.A = m.transpose() * fit.whitened_gram_inv * m;
    q.b = m.transpose() * fit.whitened_gram_inv * r_y;
    q.c = r_y.dot(fit.whitened_gram_inv * r_y);
    return q;
  }

  const Eigen::VectorXd a = fit.whitened_design * (fit.whitened_gram_inv * r_y);
  const Eigen::MatrixXd bm = fit.whitened_design * (fit.whitened_gram_inv * m);
  QuadraticObjective q;
  q.A = bm.transpose() * sig.asDiagonal() * bm / n;
  q.b = bm.transpose() * sig.asDiagonal() * a / n;
  q.c = a.dot(sig.asDiagonal() * a) / n;
  return q;
}

LogLikelihood make_log_quasi_likelihood(const QuasiPosteriorSpec& spec) {
  const double half_n = 0.5 * spec.n;
  const GaussianSeriesPrior prior = spec.prior;
  if (spec.objective.model.kind == ModelKind::npiv && !spec.objective.continuously_updated()) {
    const QuadraticObjective q = quadratic_objective(spec.objective);
    const Eigen::VectorXd sd = prior.scale * prior.lambda.cwiseSqrt();
    return [q, sd, half_n](const Eigen::VectorXd& z) {
      return -half_n * q.value(sd.cwiseProduct(z));
    };
  }
  const ObjectiveSpec objective = spec.objective;
  return [objective, prior, half_n](const Eigen::VectorXd& z) {
    return -half_n * quasi_objective(objective, prior.transform(z));
  };
}

ChainState pcn_step(const ChainState& state, const LogLikelihood& loglike, RngStream& rng,
                    double* accept_prob, bool* accepted) {
  const double beta = state.step;
  if (!(beta >= 0.0 && beta <= 1.0))
    throw invalid_argument_error("pcn_step: step must be in [0,1]");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Eigen::VectorXd xi(state.z.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = gauss(rng);
  const Eigen::VectorXd proposal = std::sqrt(1.0 - beta * beta) * state.z + beta * xi;
  const double ll_prop = loglike(proposal);
  const double prob = std::min(1.0, std::exp(ll_prop - state.log_like));
  if (accept_prob != nullptr) *accept_prob = prob;
  const bool take = unif(rng) < prob;
  if (accepted != nullptr) *accepted = take;
  ChainState next = state;
  if (take) {
    next.z = proposal;
    next.log_like = ll_prop;
  }
  return next;
}

ChainState pcn_step(const ChainState& state, const QuasiPosteriorSpec& spec, RngStream& rng) {
  return pcn_step(state, make_log_quasi_likelihood(spec), rng);
}

ChainResult run_chain(const LogLikelihood& loglike, const GaussianSeriesPrior& prior,
                      const ChainSettings& settings, std::uint64_t seed) {
  if (settings.iterations <= settings.burn_in || settings.burn_in < 0)
    throw invalid_argument_error("run_chain: need iterations > burn_in >= 0");
  if (settings.thin < 1) throw invalid_argument_error("run_chain: thin must be >= 1");

  RngStream rng = make_stream(seed);
  const int J = prior.basis.size;

  ChainState state;
  state.z = Eigen::VectorXd::Zero(J);
  state.log_like = loglike(state.z);
  state.step = settings.initial_step;
  if (!std::isfinite(state.log_like))
    throw numerical_error("run_chain: log-likelihood not finite at the prior mean");

  const int keep = (settings.iterations - settings.burn_in) / settings.thin;
  if (keep < 1) throw invalid_argument_error("run_chain: no draws retained, reduce thin");

  ChainResult result;
  result.basis = prior.basis;
  result.seed = seed;
  result.draws.resize(keep, J);

  double log_beta = std::log(state.step);
  long accepted = 0, post_burn = 0;
  int stored = 0;
  for (int it = 1; it <= settings.iterations; ++it) {
    double prob = 0.0;
    bool take = false;
    state = pcn_step(state, loglike, rng, &prob, &take);
    if (it <= settings.burn_in) {
      // Robbins-Monro on log beta, frozen after burn-in to preserve ergodicity.
      log_beta += std::pow(static_cast<double>(it), -0.6) * (prob - settings.target_accept);
      state.step = std::clamp(std::exp(log_beta), 1e-4, 1.0);
    } else {
      ++post_burn;
      accepted += take ? 1 : 0;
      const int offset = it - settings.burn_in;
      if (offset % settings.thin == 0 && stored < keep)
        result.draws.row(stored++) = prior.transform(state.z).coeffs.transpose();
    }
  }
  result.step_final = state.step;
  result.accept_rate = post_burn > 0 ? static_cast<double>(accepted) / post_burn : 0.0;

  double ess = std::numeric_limits<double>::infinity();
  const int tracked_coeffs = std::min(J, 10);
  for (int jcol = 0; jcol < tracked_coeffs; ++jcol)
    ess = std::min(ess, effective_sample_size(result.draws.col(jcol)));
  if (settings.track.has_value()) {
    Eigen::VectorXd phi = *settings.track;
    if (phi.size() != J)
      throw invalid_argument_error("run_chain: tracked functional has wrong length");
    ess = std::min(ess, effective_sample_size(result.draws * phi));
  }
  result.ess_min = ess;
  result.low_ess_warning = ess < 50.0;
  return result;
}

ChainResult run_chain(const QuasiPosteriorSpec& spec, const ChainSettings& settings,
                      std::uint64_t seed) {
  return run_chain(make_log_quasi_likelihood(spec), spec.prior, settings, seed);
}

FunctionCoefficients posterior_mean(const ChainResult& chain) {
  if (chain.draws.rows() < 1) throw invalid_argument_error("posterior_mean: no draws");
  return FunctionCoefficients(chain.basis, chain.draws.colwise().mean().transpose());
}

GaussianPosterior exact_gaussian_posterior(const QuasiPosteriorSpec& spec) {
  if (spec.objective.model.kind != ModelKind::npiv)
    throw invalid_argument_error("exact_gaussian_posterior: only the npiv residual is linear");
  if (spec.objective.continuously_updated())
    throw invalid_argument_error("exact_gaussian_posterior: not available in CU mode");
  if (!(spec.prior.scale > 0.0))
    throw invalid_argument_error("exact_gaussian_posterior: prior scale must be positive");

  const QuadraticObjective q = quadratic_objective(spec.objective);
  const int J = spec.prior.basis.size;
  const Eigen::VectorXd prior_var =
      (spec.prior.scale * spec.prior.scale) * spec.prior.lambda;
  Eigen::MatrixXd precision = static_cast<double>(spec.n) * q.A;
  precision += prior_var.cwiseInverse().asDiagonal();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(precision);
  GaussianPosterior post;
  post.covariance = ldlt.solve(Eigen::MatrixXd::Identity(J, J));
  post.mean = ldlt.solve(static_cast<double>(spec.n) * q.b);
  return post;
}

}  // namespace qbcmr
