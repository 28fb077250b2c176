#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qbcmr/errors.hpp"
#include "qbcmr/experiment.hpp"
#include "qbcmr/frechet.hpp"

using namespace qbcmr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("qbcmr_test_" + tag + "_" +
                                        std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE_BEGIN("unit");

TEST_CASE("config: empty file reports the missing study key") {
  TempDir tmp("cfg_empty");
  const fs::path p = tmp.path / "empty.json";
  write_text(p, "  \n");
  try {
    load_config(p);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("study") != std::string::npos);
  }
}

TEST_CASE("config: unknown keys are named in the error") {
  TempDir tmp("cfg_unknown");
  const fs::path p = tmp.path / "typo.json";
  write_text(p, R"({"study": "fit", "design": "npiv-mild", "alpah": 1.0})");
  try {
    load_config(p);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("alpah") != std::string::npos);
  }

  write_text(p, R"({"study": "fit", "chain": {"iters": 10}})");
  try {
    load_config(p);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("chain.iters") != std::string::npos);
  }
}

TEST_CASE("config: K accepts integers and the auto sentinel") {
  TempDir tmp("cfg_k");
  const fs::path p = tmp.path / "k.json";
  write_text(p, R"({"study": "fit", "K": "auto", "J": 32})");
  const ExperimentConfig c = load_config(p);
  CHECK(c.K == 0);
  CHECK(c.J == 32);
  write_text(p, R"({"study": "fit", "K": "sometimes"})");
  CHECK_THROWS_AS(load_config(p), config_error);
  write_text(p, R"({"study": "fit", "K": 0})");
  CHECK_THROWS_AS(load_config(p), config_error);
}

TEST_CASE("config round trip: write then read gives the same configuration") {
  TempDir tmp("cfg_rt");
  ExperimentConfig cfg;
  cfg.study = "coverage";
  cfg.design = "npiv-het";
  cfg.alpha = 1.5;
  cfg.K = 4;
  cfg.J = 0;
  cfg.weighting = "optimal";
  cfg.n = 750;
  cfg.replications = 12;
  cfg.chain.iterations = 11000;
  cfg.chain.burn_in = 2500;
  cfg.chain.thin = 3;
  cfg.chain.target_accept = 0.3;
  cfg.seed = 99;
  cfg.out = "some/dir";
  cfg.gamma = 0.05;
  cfg.phi_tilde = {1.0, -0.25, 0.125};
  cfg.model_kind = "npiv";

  const fs::path p = tmp.path / "rt.json";
  write_config(p, cfg);
  const ExperimentConfig back = load_config(p);
  CHECK(back.study == cfg.study);
  CHECK(back.design == cfg.design);
  CHECK(back.alpha == cfg.alpha);
  CHECK(back.K == cfg.K);
  CHECK(back.J == cfg.J);
  CHECK(back.weighting == cfg.weighting);
  CHECK(back.n == cfg.n);
  CHECK(back.replications == cfg.replications);
  CHECK(back.chain.iterations == cfg.chain.iterations);
  CHECK(back.chain.burn_in == cfg.chain.burn_in);
  CHECK(back.chain.thin == cfg.chain.thin);
  CHECK(back.chain.target_accept == cfg.chain.target_accept);
  CHECK(back.seed == cfg.seed);
  CHECK(back.out == cfg.out);
  CHECK(back.gamma == cfg.gamma);
  CHECK(back.phi_tilde == cfg.phi_tilde);
  REQUIRE(back.model_kind.has_value());
  CHECK(*back.model_kind == "npiv");
}

TEST_CASE("catalog: unresolvable names are reported, known names validate") {
  CHECK_THROWS_AS(catalog_design("npiv-mispelled"), config_error);
  try {
    catalog_design("npiv-mispelled");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("npiv-mispelled") != std::string::npos);
  }
  for (const auto& name : catalog_names()) CHECK_NOTHROW(catalog_design(name));
  CHECK_THROWS_AS(parse_weighting("diag"), config_error);
}

TEST_CASE("ill-posedness labels agree with the singular-value classifier") {
  const SieveBasisSpec basis{BasisFamily::cosine, 1, 12};
  for (const char* name : {"npiv-mild", "npiv-severe"}) {
    const DgpDesign d = catalog_design(name);
    const WeakNormWeights label = design_ill_posedness(d);
    const FrechetOperator op = frechet_operator_matrix(d, basis, basis);
    CHECK(classify_illposedness(op.singular_values()) == label.kind);
  }
}

TEST_CASE("default truth lies in the p-Sobolev space of the rate theory") {
  const FunctionCoefficients h0 = default_truth(16, 1.0, 1);
  // p = alpha + d/2 = 1.5: the norm must be finite and stable under J.
  CHECK(sobolev_norm(h0, 1.5) < 2.0);
  CHECK(h0.coeffs[0] == doctest::Approx(1.0));
  CHECK(h0.coeffs[1] < 0.0);  // alternating signs
  CHECK(h0.coeffs[2] > 0.0);
}

TEST_CASE("dataset CSV round trip with the pinned header layout") {
  TempDir tmp("csv");
  const DgpDesign d = catalog_design("npiv-mild");
  RngStream rng = make_stream(91);
  const Dataset data = simulate_dgp(d, 50, rng);
  const fs::path p = tmp.path / "data.csv";
  write_dataset_csv(p, data);

  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  CHECK(header == "X1,Y,W1");

  const Dataset back = read_dataset_csv(p);
  CHECK(back.n() == data.n());
  CHECK((back.X - data.X).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((back.Y - data.Y).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((back.W - data.W).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("json lines: 17 significant digits and key order") {
  const JsonRecord rec{{"a", 1.0 / 3.0}, {"b", std::int64_t(42)}, {"c", true},
                       {"d", std::string("x\"y")}};
  const std::string line = to_json_line(rec);
  CHECK(line == "{\"a\":0.33333333333333331,\"b\":42,\"c\":true,\"d\":\"x\\\"y\"}");
}

TEST_CASE("run_study rejects unknown studies and missing design") {
  ExperimentConfig cfg;
  cfg.study = "explore";
  CHECK_THROWS_AS(run_study(cfg), config_error);
  cfg.study = "simulate";
  cfg.design.clear();
  CHECK_THROWS_AS(run_study(cfg), config_error);
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("invariants");

TEST_CASE("prior-draw study: deterministic bytes and a roughness trend in alpha") {
  TempDir tmp("priordraw");
  ExperimentConfig cfg;
  cfg.study = "prior-draw";
  cfg.prior_alphas = {0.5, 1.0, 3.0};
  cfg.prior_draws = 100;
  cfg.grid = 201;
  cfg.seed = 11;
  cfg.out = (tmp.path / "a").string();
  run_prior_draw(cfg);
  const std::string bytes_a = read_text(tmp.path / "a" / "prior_paths.csv");

  cfg.out = (tmp.path / "b").string();
  run_prior_draw(cfg);
  CHECK(bytes_a == read_text(tmp.path / "b" / "prior_paths.csv"));

  const CsvTable table = read_csv(tmp.path / "a" / "prior_paths.csv");
  REQUIRE(table.header.size() == 1 + 3 * 100);
  // Mean squared second difference decreases with alpha.
  std::vector<double> rough(3, 0.0);
  for (int a = 0; a < 3; ++a) {
    for (int k = 0; k < 100; ++k) {
      const int col = 1 + a * 100 + k;
      for (std::size_t g = 1; g + 1 < table.rows.size(); ++g) {
        const double second_diff = table.rows[g + 1][col] - 2.0 * table.rows[g][col] +
                                   table.rows[g - 1][col];
        rough[a] += second_diff * second_diff / 100.0;
      }
    }
  }
  CHECK(rough[0] > rough[1]);
  CHECK(rough[1] > rough[2]);
}

TEST_CASE("prior-draw: single alpha, single draw gives a two-column CSV") {
  TempDir tmp("priordraw1");
  ExperimentConfig cfg;
  cfg.study = "prior-draw";
  cfg.prior_alphas = {1.5};
  cfg.prior_draws = 1;
  cfg.grid = 11;
  cfg.out = tmp.path.string();
  run_prior_draw(cfg);
  const CsvTable table = read_csv(tmp.path / "prior_paths.csv");
  CHECK(table.header.size() == 2);
  CHECK(table.header[0] == "x");
  CHECK(table.rows.size() == 11);
}

TEST_CASE("rate study: degenerate truth gives small decreasing errors") {
  TempDir tmp("ratenull");
  ExperimentConfig cfg;
  cfg.study = "rate-study";
  cfg.design = "npiv-null";
  cfg.n_grid = {200, 800, 3200};
  cfg.replications = 4;
  cfg.chain.iterations = 6000;
  cfg.chain.burn_in = 2000;
  cfg.chain.thin = 4;
  cfg.seed = 13;
  cfg.out = tmp.path.string();
  cfg.workers = 2;
  const RateStudyResult res = run_rate_study(cfg);
  for (double e : res.mean_errors) CHECK(e > 0.0);
  CHECK(res.mean_errors.front() > res.mean_errors.back());
  CHECK(res.mean_errors.back() < 0.1);  // prior-shrinkage floor only
}

TEST_CASE("rate study: negative slope on the shipped mild design with R = 20") {
  TempDir tmp("ratemild");
  ExperimentConfig cfg;
  cfg.study = "rate-study";
  cfg.design = "npiv-mild";
  cfg.n_grid = {200, 800, 3200};
  cfg.replications = 20;
  cfg.chain.iterations = 8000;
  cfg.chain.burn_in = 2000;
  cfg.chain.thin = 4;
  cfg.seed = 14;
  cfg.out = tmp.path.string();
  cfg.workers = 2;
  const RateStudyResult res = run_rate_study(cfg);
  CHECK(res.slope < 0.0);
  CHECK(res.theoretical_exponent == doctest::Approx(-0.2));
  for (std::size_t i = 0; i + 1 < res.mean_errors.size(); ++i)
    CHECK(res.mean_errors[i] > res.mean_errors[i + 1]);
  CHECK(fs::exists(tmp.path / "rate_summary.csv"));
  CHECK(fs::exists(tmp.path / "rate.jsonl"));
}

TEST_CASE("rate study rejects severe designs and bad grids") {
  ExperimentConfig cfg;
  cfg.study = "rate-study";
  cfg.design = "npiv-severe";
  cfg.n_grid = {200, 800, 3200};
  CHECK_THROWS_AS(run_rate_study(cfg), config_error);
  cfg.design = "npiv-mild";
  cfg.n_grid = {200, 800};
  CHECK_THROWS_AS(run_rate_study(cfg), config_error);
  cfg.n_grid = {200, 800, 800};
  CHECK_THROWS_AS(run_rate_study(cfg), config_error);
}

TEST_CASE("coverage study artifacts are bytes-identical across worker pools") {
  TempDir tmp("covdet");
  ExperimentConfig cfg;
  cfg.study = "coverage";
  cfg.design = "npiv-het";
  cfg.weighting = "identity";
  cfg.n = 250;
  cfg.replications = 6;
  cfg.gamma = 0.1;
  cfg.phi_tilde = {1.0, 0.5};
  cfg.chain.iterations = 4000;
  cfg.chain.burn_in = 1000;
  cfg.seed = 15;
  cfg.out = (tmp.path / "w1").string();
  cfg.workers = 1;
  run_coverage_study(cfg);
  cfg.out = (tmp.path / "w2").string();
  cfg.workers = 2;
  run_coverage_study(cfg);
  const std::string a = read_text(tmp.path / "w1" / "coverage.jsonl");
  CHECK(!a.empty());
  CHECK(a == read_text(tmp.path / "w2" / "coverage.jsonl"));
  // Summary totals match the replication-record count.
  CHECK(a.find("\"replications\":6") != std::string::npos);
  CHECK(std::count(a.begin(), a.end(), '\n') == 7);  // 6 records + summary
}

TEST_CASE("fit and simulate studies produce their artifacts") {
  TempDir tmp("fitsim");
  ExperimentConfig sim;
  sim.study = "simulate";
  sim.design = "npqiv-mild";
  sim.n = 40;
  sim.seed = 16;
  sim.out = (tmp.path / "sim").string();
  run_simulate(sim);
  const Dataset data = read_dataset_csv(tmp.path / "sim" / "dataset.csv");
  CHECK(data.n() == 40);

  ExperimentConfig fit;
  fit.study = "fit";
  fit.design = "npiv-mild";
  fit.n = 300;
  fit.K = 3;
  fit.J = 16;
  fit.chain.iterations = 3000;
  fit.chain.burn_in = 1000;
  fit.seed = 17;
  fit.out = (tmp.path / "fit").string();
  run_fit(fit);
  CHECK(fs::exists(tmp.path / "fit" / "draws.csv"));
  CHECK(fs::exists(tmp.path / "fit" / "posterior_mean.csv"));
  CHECK(fs::exists(tmp.path / "fit" / "diagnostics.jsonl"));
  const CsvTable draws = read_csv(tmp.path / "fit" / "draws.csv");
  CHECK(draws.header.size() == 16);
  CHECK(draws.header[0] == "c1");
  CHECK(draws.rows.size() == (3000 - 1000) / 5);

  // The fit study can also consume a dataset from disk.
  ExperimentConfig refit = fit;
  refit.data = (tmp.path / "sim" / "dataset.csv").string();
  refit.design = "npqiv-mild";
  refit.K = 2;
  refit.J = 8;
  refit.out = (tmp.path / "refit").string();
  run_fit(refit);
  CHECK(fs::exists(tmp.path / "refit" / "draws.csv"));
}

TEST_SUITE_END();
