// Benchmarks for the hot paths: objective evaluation (quadratic-form cache
// vs direct), pCN steps, basis evaluation and the exact conjugate solve.

#include <benchmark/benchmark.h>

#include "qbcmr/experiment.hpp"
#include "qbcmr/posterior.hpp"

using namespace qbcmr;

namespace {

struct Setup {
  QuasiPosteriorSpec spec;
  FunctionCoefficients h;

  static Setup make(const char* design_name, int n, int K, int J) {
    const DgpDesign design = catalog_design(design_name);
    RngStream rng = make_stream(1);
    const Dataset data = simulate_dgp(design, n, rng);
    auto fit = std::make_shared<const FirstStageFit>(
        first_stage_fit(data, SieveBasisSpec{BasisFamily::cosine, 1, K}));
    const SieveBasisSpec basisX{BasisFamily::cosine, 1, J};
    Setup s{{make_objective(fit, design.model, WeightFunction::identity(), basisX),
             scaled_prior(1.0, J, K, n, basisX), n},
            FunctionCoefficients(basisX, Eigen::VectorXd::Zero(J))};
    RngStream hrng = make_stream(2);
    s.h = sample_prior(s.spec.prior, hrng);
    return s;
  }
};

void BM_objective_direct(benchmark::State& state) {
  const Setup s = Setup::make("npiv-mild", static_cast<int>(state.range(0)), 4, 64);
  for (auto _ : state) benchmark::DoNotOptimize(quasi_objective(s.spec.objective, s.h));
}
BENCHMARK(BM_objective_direct)->Arg(1000)->Arg(8000);

void BM_objective_quadratic_form(benchmark::State& state) {
  const Setup s = Setup::make("npiv-mild", static_cast<int>(state.range(0)), 4, 64);
  const LogLikelihood ll = make_log_quasi_likelihood(s.spec);
  const Eigen::VectorXd z = Eigen::VectorXd::Ones(64);
  for (auto _ : state) benchmark::DoNotOptimize(ll(z));
}
BENCHMARK(BM_objective_quadratic_form)->Arg(1000)->Arg(8000);

void BM_objective_npqiv(benchmark::State& state) {
  const Setup s = Setup::make("npqiv-mild", static_cast<int>(state.range(0)), 4, 64);
  for (auto _ : state) benchmark::DoNotOptimize(quasi_objective(s.spec.objective, s.h));
}
BENCHMARK(BM_objective_npqiv)->Arg(1000)->Arg(8000);

void BM_pcn_step(benchmark::State& state) {
  const Setup s = Setup::make("npiv-mild", 1000, 4, 64);
  const LogLikelihood ll = make_log_quasi_likelihood(s.spec);
  RngStream rng = make_stream(3);
  ChainState st;
  st.z = Eigen::VectorXd::Zero(64);
  st.log_like = ll(st.z);
  st.step = 0.2;
  for (auto _ : state) {
    st = pcn_step(st, ll, rng);
    benchmark::DoNotOptimize(st.log_like);
  }
}
BENCHMARK(BM_pcn_step);

void BM_exact_gaussian_posterior(benchmark::State& state) {
  const Setup s = Setup::make("npiv-mild", 1000, 4, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(exact_gaussian_posterior(s.spec));
}
BENCHMARK(BM_exact_gaussian_posterior)->Arg(16)->Arg(64);

void BM_design_matrix(benchmark::State& state) {
  const SieveBasisSpec basis{BasisFamily::cosine, 1, 64};
  RngStream rng = make_stream(4);
  std::uniform_real_distribution<double> unif;
  Eigen::VectorXd pts(state.range(0));
  for (int i = 0; i < pts.size(); ++i) pts[i] = unif(rng);
  for (auto _ : state) benchmark::DoNotOptimize(design_matrix(basis, pts));
}
BENCHMARK(BM_design_matrix)->Arg(1000)->Arg(8000);

}  // namespace

BENCHMARK_MAIN();
