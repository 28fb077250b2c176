// qbcmr: quasi-Bayes estimation and Monte Carlo studies for conditional
// moment restriction models. See README.md for the config schema.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>
#include <thread>

#include "qbcmr/errors.hpp"
#include "qbcmr/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
  std::string config_path;
  std::int64_t seed = -1;
  std::string out;
  int workers = 0;
};

void add_common(CLI::App* sub, CommonOptions& opts) {
  sub->add_option("--config", opts.config_path, "Path to an experiment config (JSON)")
      ->required();
  sub->add_option("--seed", opts.seed, "Override the config's base seed");
  sub->add_option("--out", opts.out, "Override the config's output directory");
  sub->add_option("--workers", opts.workers,
                  "Worker pool size (default: hardware concurrency)");
}

int run(const std::string& study, const CommonOptions& opts) {
  qbcmr::ExperimentConfig config = qbcmr::load_config(opts.config_path);
  if (config.study != study)
    throw qbcmr::config_error("config study '" + config.study +
                              "' does not match subcommand '" + study + "'");
  if (opts.seed >= 0) config.seed = static_cast<std::uint64_t>(opts.seed);
  if (!opts.out.empty()) config.out = opts.out;
  config.workers = opts.workers > 0
                       ? opts.workers
                       : std::max(1u, std::thread::hardware_concurrency());
  qbcmr::run_study(config);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-Bayes conditional moment restriction toolkit"};
  app.require_subcommand(1);

  const std::vector<std::string> studies = {"simulate", "fit", "coverage", "rate-study",
                                            "prior-draw"};
  std::map<std::string, CommonOptions> options;
  for (const auto& name : studies) {
    CLI::App* sub = app.add_subcommand(name, "Run the '" + name + "' study");
    add_common(sub, options[name]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  const std::string study = app.get_subcommands().front()->get_name();
  try {
    return run(study, options[study]);
  } catch (const qbcmr::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const qbcmr::invalid_argument_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
