#include "qbcmr/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qbcmr/errors.hpp"
#include "qbcmr/parallel.hpp"
#include "qbcmr/stats.hpp"

namespace qbcmr {

namespace {

using nlohmann::ordered_json;

void reject_unknown_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                         const std::string& scope) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.contains(key))
      throw config_error("unknown key '" + (scope.empty() ? key : scope + "." + key) + "'");
  }
}

int parse_auto_or_int(const ordered_json& v, const std::string& key) {
  if (v.is_string()) {
    if (v.get<std::string>() == "auto") return 0;
    throw config_error("key '" + key + "' must be an integer or \"auto\"");
  }
  if (!v.is_number_integer()) throw config_error("key '" + key + "' must be an integer or \"auto\"");
  const int value = v.get<int>();
  if (value < 1) throw config_error("key '" + key + "' must be >= 1");
  return value;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)); };
  if (std::all_of(text.begin(), text.end(), is_space))
    throw config_error("missing required key 'study'");

  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw config_error("config root must be an object");

  reject_unknown_keys(root,
                      {"study", "design", "model", "alpha", "K", "J", "weighting", "n",
                       "n_grid", "replications", "chain", "seed", "out", "gamma", "phi_tilde",
                       "prior_draw", "data"},
                      "");
  if (!root.contains("study")) throw config_error("missing required key 'study'");

  ExperimentConfig cfg;
  try {
  cfg.study = root.at("study").get<std::string>();
  if (root.contains("design")) cfg.design = root.at("design").get<std::string>();
  if (root.contains("model")) {
    const auto& m = root.at("model");
    reject_unknown_keys(m, {"kind", "gamma"}, "model");
    if (m.contains("kind")) cfg.model_kind = m.at("kind").get<std::string>();
    if (m.contains("gamma")) cfg.model_gamma = m.at("gamma").get<double>();
  }
  if (root.contains("alpha")) cfg.alpha = root.at("alpha").get<double>();
  if (root.contains("K")) cfg.K = parse_auto_or_int(root.at("K"), "K");
  if (root.contains("J")) cfg.J = parse_auto_or_int(root.at("J"), "J");
  if (root.contains("weighting")) cfg.weighting = root.at("weighting").get<std::string>();
  if (root.contains("n")) cfg.n = root.at("n").get<int>();
  if (root.contains("n_grid")) cfg.n_grid = root.at("n_grid").get<std::vector<int>>();
  if (root.contains("replications")) cfg.replications = root.at("replications").get<int>();
  if (root.contains("chain")) {
    const auto& c = root.at("chain");
    reject_unknown_keys(c, {"iterations", "burn_in", "thin", "target_accept"}, "chain");
    if (c.contains("iterations")) cfg.chain.iterations = c.at("iterations").get<int>();
    if (c.contains("burn_in")) cfg.chain.burn_in = c.at("burn_in").get<int>();
    if (c.contains("thin")) cfg.chain.thin = c.at("thin").get<int>();
    if (c.contains("target_accept")) cfg.chain.target_accept = c.at("target_accept").get<double>();
  }
  if (root.contains("seed")) cfg.seed = root.at("seed").get<std::uint64_t>();
  if (root.contains("out")) cfg.out = root.at("out").get<std::string>();
  if (root.contains("gamma")) cfg.gamma = root.at("gamma").get<double>();
  if (root.contains("phi_tilde")) cfg.phi_tilde = root.at("phi_tilde").get<std::vector<double>>();
  if (root.contains("prior_draw")) {
    const auto& p = root.at("prior_draw");
    reject_unknown_keys(p, {"alphas", "draws", "grid"}, "prior_draw");
    if (p.contains("alphas")) cfg.prior_alphas = p.at("alphas").get<std::vector<double>>();
    if (p.contains("draws")) cfg.prior_draws = p.at("draws").get<int>();
    if (p.contains("grid")) cfg.grid = p.at("grid").get<int>();
  }
  if (root.contains("data")) cfg.data = root.at("data").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config value has the wrong type: ") + e.what());
  }
  return cfg;
}

void write_config(const std::filesystem::path& path, const ExperimentConfig& cfg) {
  ordered_json root;
  root["study"] = cfg.study;
  if (!cfg.design.empty()) root["design"] = cfg.design;
  if (cfg.model_kind || cfg.model_gamma) {
    ordered_json m;
    if (cfg.model_kind) m["kind"] = *cfg.model_kind;
    if (cfg.model_gamma) m["gamma"] = *cfg.model_gamma;
    root["model"] = m;
  }
  root["alpha"] = cfg.alpha;
  root["K"] = cfg.K == 0 ? ordered_json("auto") : ordered_json(cfg.K);
  root["J"] = cfg.J == 0 ? ordered_json("auto") : ordered_json(cfg.J);
  root["weighting"] = cfg.weighting;
  if (cfg.n > 0) root["n"] = cfg.n;
  if (!cfg.n_grid.empty()) root["n_grid"] = cfg.n_grid;
  root["replications"] = cfg.replications;
  root["chain"] = {{"iterations", cfg.chain.iterations},
                   {"burn_in", cfg.chain.burn_in},
                   {"thin", cfg.chain.thin},
                   {"target_accept", cfg.chain.target_accept}};
  root["seed"] = cfg.seed;
  root["out"] = cfg.out;
  root["gamma"] = cfg.gamma;
  root["phi_tilde"] = cfg.phi_tilde;
  root["prior_draw"] = {{"alphas", cfg.prior_alphas}, {"draws", cfg.prior_draws},
                        {"grid", cfg.grid}};
  if (!cfg.data.empty()) root["data"] = cfg.data;
  std::ofstream out(path);
  if (!out) throw config_error("cannot write config file " + path.string());
  out << root.dump(2) << '\n';
}

FunctionCoefficients default_truth(int j0, double alpha, int dim) {
  const double p = alpha + 0.5 * dim;
  const double expo = p / dim + 0.5 + 0.01;
  SieveBasisSpec basis{BasisFamily::cosine, dim, j0};
  Eigen::VectorXd coeffs(j0);
  for (int i = 1; i <= j0; ++i)
    coeffs[i - 1] = ((i % 2 == 1) ? 1.0 : -1.0) * std::pow(static_cast<double>(i), -expo);
  return FunctionCoefficients(basis, coeffs);
}

std::vector<std::string> catalog_names() {
  return {"npiv-mild", "npiv-het", "npiv-severe", "npqiv-mild", "npiv-null"};
}

DgpDesign catalog_design(const std::string& name) {
  DgpDesign d;
  d.model = MomentModel::npiv();
  d.endogeneity = 0.3;
  d.noise_sd = 0.25;
  if (name == "npiv-mild") {
    d.copula = {CopulaSpec::Kind::cosine_mixture, 0.43, 1.0, 4};
    d.h0 = default_truth(4);
  } else if (name == "npiv-het") {
    d.copula = {CopulaSpec::Kind::cosine_mixture, 0.55, 1.0, 3};
    d.h0 = default_truth(2);
    d.noise_sd = 0.5;
    d.het_slope = 0.4;
  } else if (name == "npiv-severe") {
    d.copula = {CopulaSpec::Kind::gaussian, 0.8, 1.0, 0};
    d.h0 = default_truth(16);
  } else if (name == "npqiv-mild") {
    d.copula = {CopulaSpec::Kind::cosine_mixture, 0.28, 1.0, 8};
    d.h0 = default_truth(8);
    d.model = MomentModel::npqiv(0.5);
  } else if (name == "npiv-null") {
    d.copula = {CopulaSpec::Kind::cosine_mixture, 0.28, 1.0, 8};
    d.h0 = FunctionCoefficients(SieveBasisSpec{BasisFamily::cosine, 1, 1},
                                Eigen::VectorXd::Zero(1));
    d.endogeneity = 0.0;
    d.noise_sd = 0.0;
  } else {
    std::string known;
    for (const auto& nm : catalog_names()) known += (known.empty() ? "" : ", ") + nm;
    throw config_error("unknown design '" + name + "' (known designs: " + known + ")");
  }
  d.validate();
  return d;
}

WeakNormWeights design_ill_posedness(const DgpDesign& design) {
  if (design.copula.kind == CopulaSpec::Kind::cosine_mixture)
    return WeakNormWeights::mild(design.copula.zeta, design.h0.basis.dim);
  return WeakNormWeights::severe(-std::log(design.copula.strength),
                                 static_cast<double>(design.h0.basis.dim),
                                 design.h0.basis.dim);
}

WeightingMode parse_weighting(const std::string& name) {
  if (name == "identity") return WeightingMode::identity;
  if (name == "fixed") return WeightingMode::fixed_oracle;
  if (name == "optimal") return WeightingMode::optimal;
  if (name == "cu") return WeightingMode::cu;
  throw config_error("unknown weighting '" + name +
                     "' (known: identity, fixed, optimal, cu)");
}

FitConfig make_fit_config(const ExperimentConfig& config) {
  if (config.design.empty()) throw config_error("missing required key 'design'");
  FitConfig fc;
  fc.design = catalog_design(config.design);
  if (config.model_kind) {
    if (*config.model_kind == "npiv")
      fc.design.model = MomentModel::npiv();
    else if (*config.model_kind == "npqiv")
      fc.design.model = MomentModel::npqiv(config.model_gamma.value_or(0.5));
    else
      throw config_error("unknown model kind '" + *config.model_kind + "'");
  } else if (config.model_gamma && fc.design.model.kind == ModelKind::npqiv) {
    fc.design.model = MomentModel::npqiv(*config.model_gamma);
  }
  fc.design.validate();
  fc.alpha = config.alpha;
  fc.K = config.K;
  fc.J = config.J;
  fc.weighting = parse_weighting(config.weighting);
  fc.ill_posedness = design_ill_posedness(fc.design);
  fc.chain = config.chain;
  return fc;
}

namespace {

std::filesystem::path ensure_out_dir(const ExperimentConfig& config) {
  std::filesystem::path dir(config.out);
  std::filesystem::create_directories(dir);
  return dir;
}

Eigen::VectorXd padded_truth(const DgpDesign& design, int J) {
  Eigen::VectorXd truth = Eigen::VectorXd::Zero(J);
  const Eigen::Index m = std::min<Eigen::Index>(design.h0.coeffs.size(), J);
  truth.head(m) = design.h0.coeffs.head(m);
  return truth;
}

}  // namespace

RateStudyResult run_rate_study(const ExperimentConfig& config) {
  const FitConfig fc = make_fit_config(config);
  if (fc.ill_posedness.kind != IllPosedness::mild)
    throw config_error("rate-study requires a mildly ill-posed design");
  if (config.n_grid.size() < 3) throw config_error("rate-study needs an n_grid of >= 3 points");
  for (std::size_t i = 1; i < config.n_grid.size(); ++i)
    if (config.n_grid[i] <= config.n_grid[i - 1])
      throw config_error("n_grid must be strictly increasing");
  const int R = config.replications;
  if (R < 1) throw config_error("replications must be >= 1");

  const int cells_per_n = R;
  const int num_n = static_cast<int>(config.n_grid.size());

  RateStudyResult result;
  result.n_values = config.n_grid;
  result.errors.assign(num_n, std::vector<double>(R, 0.0));
  std::vector<std::vector<JsonRecord>> records(num_n, std::vector<JsonRecord>(R));

  for (int ni = 0; ni < num_n; ++ni) {
    const int n = config.n_grid[ni];
    result.K_values.push_back(fc.resolve_K(n));
    result.J_values.push_back(fc.resolve_J(fc.resolve_K(n)));
  }

  parallel_for_index(num_n * cells_per_n, config.workers, [&](int cell) {
    const int ni = cell / cells_per_n;
    const int r = cell % cells_per_n;
    const int n = config.n_grid[ni];
    const std::uint64_t rep_seed = split_seed(config.seed, static_cast<std::uint64_t>(cell));
    try {
      RngStream data_rng = make_stream(rep_seed, 0);
      const Dataset data = simulate_dgp(fc.design, n, data_rng);
      const FitResult fitted = fit_quasi_posterior(fc, data, split_seed(rep_seed, 1));
      const Eigen::VectorXd truth = padded_truth(fc.design, fitted.J);
      const double err = (fitted.posterior_mean.coeffs - truth).norm();
      result.errors[ni][r] = err;
      records[ni][r] = {{"record", std::string("replication")},
                        {"n", static_cast<std::int64_t>(n)},
                        {"replication", static_cast<std::int64_t>(r)},
                        {"seed", rep_seed},
                        {"error", err},
                        {"accept_rate", fitted.chain.accept_rate},
                        {"ess_min", fitted.chain.ess_min}};
    } catch (const std::exception& e) {
      throw replication_error(cell, rep_seed, e.what());
    }
  });

  Eigen::VectorXd log_n(num_n), log_err(num_n);
  for (int ni = 0; ni < num_n; ++ni) {
    const auto& errs = result.errors[ni];
    double mean = 0.0;
    for (double e : errs) {
      if (!(e > 0.0)) throw numerical_error("rate-study: non-positive replication error");
      mean += e;
    }
    mean /= R;
    double var = 0.0;
    for (double e : errs) var += (e - mean) * (e - mean);
    var = R > 1 ? var / (R - 1) : 0.0;
    result.mean_errors.push_back(mean);
    result.se_errors.push_back(std::sqrt(var / R));
    log_n[ni] = std::log(static_cast<double>(config.n_grid[ni]));
    log_err[ni] = std::log(mean);
  }
  result.slope = ls_slope(log_n, log_err);
  if (!std::isfinite(result.slope)) throw numerical_error("rate-study: slope not finite");
  const double zeta = fc.ill_posedness.zeta;
  const int d = fc.design.h0.basis.dim;
  result.theoretical_exponent = -config.alpha / (2.0 * (config.alpha + zeta) + d);

  const std::filesystem::path dir = ensure_out_dir(config);
  CsvTable summary;
  summary.header = {"n", "K", "J", "mean_error", "se_error"};
  for (int ni = 0; ni < num_n; ++ni)
    summary.rows.push_back({static_cast<double>(config.n_grid[ni]),
                            static_cast<double>(result.K_values[ni]),
                            static_cast<double>(result.J_values[ni]), result.mean_errors[ni],
                            result.se_errors[ni]});
  write_csv(dir / "rate_summary.csv", summary);

  std::vector<JsonRecord> lines;
  for (int ni = 0; ni < num_n; ++ni)
    for (int r = 0; r < R; ++r) lines.push_back(std::move(records[ni][r]));
  lines.push_back({{"record", std::string("summary")},
                   {"slope", result.slope},
                   {"theoretical_exponent", result.theoretical_exponent},
                   {"replications", static_cast<std::int64_t>(R)}});
  write_results(lines, dir / "rate.jsonl");
  return result;
}

CoverageResult run_coverage_study(const ExperimentConfig& config) {
  if (config.n < 1) throw config_error("missing required key 'n'");
  if (config.replications < 1) throw config_error("replications must be >= 1");
  if (!(config.gamma > 0.0 && config.gamma < 1.0))
    throw config_error("gamma must be in (0,1)");
  if (config.phi_tilde.empty()) throw config_error("missing required key 'phi_tilde'");

  CoverageConfig cc;
  cc.fit = make_fit_config(config);
  SieveBasisSpec basis = cc.fit.design.h0.basis;
  basis.size = static_cast<int>(config.phi_tilde.size());
  cc.phi_tilde = FunctionCoefficients(
      basis, Eigen::Map<const Eigen::VectorXd>(config.phi_tilde.data(),
                                               static_cast<Eigen::Index>(config.phi_tilde.size())));
  cc.gamma = config.gamma;
  cc.n = config.n;
  cc.replications = config.replications;
  cc.base_seed = config.seed;
  cc.workers = config.workers;

  const CoverageResult result = coverage_study(cc);

  const std::filesystem::path dir = ensure_out_dir(config);
  std::vector<JsonRecord> lines;
  for (const auto& rec : result.records)
    lines.push_back({{"record", std::string("replication")},
                     {"replication", static_cast<std::int64_t>(rec.replication)},
                     {"seed", rec.seed},
                     {"l_h0", rec.l_h0},
                     {"center", rec.center},
                     {"radius", rec.radius},
                     {"hit", rec.hit},
                     {"accept_rate", rec.accept_rate},
                     {"ess_min", rec.ess_min}});
  lines.push_back({{"record", std::string("summary")},
                   {"replications", static_cast<std::int64_t>(result.records.size())},
                   {"gamma", config.gamma},
                   {"nominal", 1.0 - config.gamma},
                   {"coverage", result.coverage},
                   {"std_error", result.std_error},
                   {"coverage_gap", std::abs(result.coverage - (1.0 - config.gamma))},
                   {"l_h0", result.l_h0}});
  write_results(lines, dir / "coverage.jsonl");
  return result;
}

void run_prior_draw(const ExperimentConfig& config) {
  if (config.grid < 2) throw config_error("prior-draw grid resolution must be >= 2");
  if (config.prior_alphas.empty()) throw config_error("prior-draw needs at least one alpha");
  if (config.prior_draws < 1) throw config_error("prior-draw needs draws >= 1");
  const int J = config.J > 0 ? config.J : 256;
  const SieveBasisSpec basis{BasisFamily::cosine, 1, J};

  Eigen::VectorXd grid(config.grid);
  for (int g = 0; g < config.grid; ++g)
    grid[g] = static_cast<double>(g) / (config.grid - 1);
  const Eigen::MatrixXd design = design_matrix(basis, grid);

  CsvTable table;
  table.header.push_back("x");
  std::vector<Eigen::VectorXd> columns;
  int stream_index = 0;
  for (double a : config.prior_alphas) {
    const GaussianSeriesPrior prior(basis, a, 1.0);
    for (int k = 0; k < config.prior_draws; ++k) {
      RngStream rng = make_stream(split_seed(config.seed, stream_index++));
      const FunctionCoefficients path = sample_prior(prior, rng);
      columns.push_back(design * path.coeffs);
      std::ostringstream name;
      name << "alpha" << a << "_draw" << (k + 1);
      table.header.push_back(name.str());
    }
  }
  for (int g = 0; g < config.grid; ++g) {
    std::vector<double> row{grid[g]};
    for (const auto& col : columns) row.push_back(col[g]);
    table.rows.push_back(std::move(row));
  }
  const std::filesystem::path dir = ensure_out_dir(config);
  write_csv(dir / "prior_paths.csv", table);
}

void run_simulate(const ExperimentConfig& config) {
  const FitConfig fc = make_fit_config(config);
  if (config.n < 1) throw config_error("missing required key 'n'");
  RngStream rng = make_stream(split_seed(config.seed, 0), 0);
  const Dataset data = simulate_dgp(fc.design, config.n, rng);
  const std::filesystem::path dir = ensure_out_dir(config);
  write_dataset_csv(dir / "dataset.csv", data);
}

void run_fit(const ExperimentConfig& config) {
  const FitConfig fc = make_fit_config(config);
  Dataset data;
  if (!config.data.empty()) {
    data = read_dataset_csv(config.data);
  } else {
    if (config.n < 1) throw config_error("missing required key 'n' (or provide 'data')");
    RngStream rng = make_stream(split_seed(config.seed, 0), 0);
    data = simulate_dgp(fc.design, config.n, rng);
  }
  const FitResult fitted =
      fit_quasi_posterior(fc, data, split_seed(split_seed(config.seed, 0), 1));

  const std::filesystem::path dir = ensure_out_dir(config);
  CsvTable draws;
  for (int j = 1; j <= fitted.J; ++j) draws.header.push_back("c" + std::to_string(j));
  draws.rows.reserve(fitted.chain.draws.rows());
  for (Eigen::Index i = 0; i < fitted.chain.draws.rows(); ++i) {
    std::vector<double> row(fitted.J);
    for (int j = 0; j < fitted.J; ++j) row[j] = fitted.chain.draws(i, j);
    draws.rows.push_back(std::move(row));
  }
  write_csv(dir / "draws.csv", draws);

  CsvTable mean;
  mean.header = draws.header;
  {
    std::vector<double> row(fitted.J);
    for (int j = 0; j < fitted.J; ++j) row[j] = fitted.posterior_mean.coeffs[j];
    mean.rows.push_back(std::move(row));
  }
  write_csv(dir / "posterior_mean.csv", mean);

  write_results({{{"accept_rate", fitted.chain.accept_rate},
                  {"ess_min", fitted.chain.ess_min},
                  {"beta_final", fitted.chain.step_final},
                  {"seed", fitted.chain.seed},
                  {"K", static_cast<std::int64_t>(fitted.K)},
                  {"J", static_cast<std::int64_t>(fitted.J)},
                  {"n", static_cast<std::int64_t>(data.n())},
                  {"low_ess_warning", fitted.chain.low_ess_warning}}},
                dir / "diagnostics.jsonl");
}

void run_study(const ExperimentConfig& config) {
  if (config.study == "fit")
    run_fit(config);
  else if (config.study == "simulate")
    run_simulate(config);
  else if (config.study == "rate-study")
    run_rate_study(config);
  else if (config.study == "coverage")
    run_coverage_study(config);
  else if (config.study == "prior-draw")
    run_prior_draw(config);
  else
    throw config_error("unknown study '" + config.study +
                       "' (known: fit, simulate, rate-study, coverage, prior-draw)");
}

}  // namespace qbcmr
