#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qbcmr/inference.hpp"
#include "qbcmr/io.hpp"

namespace qbcmr {

/// Parsed experiment configuration. The file format is strict JSON with
/// unknown-key rejection; see README for the schema.
struct ExperimentConfig {
  std::string study;   // fit | simulate | rate-study | coverage | prior-draw
  std::string design;  // catalog name
  std::optional<std::string> model_kind;  // "npiv" | "npqiv" override
  std::optional<double> model_gamma;      // npqiv quantile override
  double alpha = 1.0;
  int K = 0;  // 0 = "auto" (select_K)
  int J = 0;  // 0 = "auto" (max(4K, 64))
  std::string weighting = "identity";  // identity | fixed | optimal | cu
  int n = 0;
  std::vector<int> n_grid;
  int replications = 1;
  ChainSettings chain;
  std::uint64_t seed = 1;
  std::string out = "results";
  double gamma = 0.10;  // credible-interval significance level
  std::vector<double> phi_tilde = {1.0, 0.5};
  std::vector<double> prior_alphas = {0.5, 1.5, 3.0};
  int prior_draws = 3;
  int grid = 101;
  std::string data;  // optional dataset CSV consumed by `fit`
  int workers = 1;   // CLI flag, not part of the config file
};

ExperimentConfig load_config(const std::filesystem::path& path);
void write_config(const std::filesystem::path& path, const ExperimentConfig& config);

/// Named synthetic designs shipped with the harness.
DgpDesign catalog_design(const std::string& name);
std::vector<std::string> catalog_names();

/// Ill-posedness of a shipped design, known from its copula: cosine mixtures
/// are mild with the configured zeta, the Gaussian copula is severe with
/// R = -log(r).
WeakNormWeights design_ill_posedness(const DgpDesign& design);

/// Default truth: coefficients (-1)^{i+1} i^{-(p/d + 1/2 + 0.01)} for
/// i <= j0, p = alpha + d/2, so h0 lies in the p-Sobolev space.
FunctionCoefficients default_truth(int j0, double alpha = 1.0, int dim = 1);

WeightingMode parse_weighting(const std::string& name);

/// Resolve the ExperimentConfig into the fit pipeline's configuration.
FitConfig make_fit_config(const ExperimentConfig& config);

struct RateStudyResult {
  std::vector<int> n_values;
  std::vector<int> K_values;
  std::vector<int> J_values;
  std::vector<double> mean_errors;
  std::vector<double> se_errors;
  std::vector<std::vector<double>> errors;  // per n, per replication
  double slope = 0.0;
  double theoretical_exponent = 0.0;
};

/// Posterior-mean L2-error scaling across an n-grid (mild designs only).
RateStudyResult run_rate_study(const ExperimentConfig& config);

/// Coverage study; delegates to coverage_study and writes JSONL + summary.
CoverageResult run_coverage_study(const ExperimentConfig& config);

/// Prior sample paths on a grid, one CSV column per (alpha, draw).
void run_prior_draw(const ExperimentConfig& config);

void run_simulate(const ExperimentConfig& config);
void run_fit(const ExperimentConfig& config);

/// Dispatch on config.study. Writes artifacts under config.out.
void run_study(const ExperimentConfig& config);

}  // namespace qbcmr
