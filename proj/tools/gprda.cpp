// gprda: dataset generation, sensitivity analysis, training and evaluation.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "gprda/harness.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kDependencyError = 3 };

void configure_logging() {
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
  if (const char* level = std::getenv("GPRDA_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  } else {
    spdlog::set_level(spdlog::level::info);
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Layered-media radar simulation and domain-adaptive material retrieval"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
  std::string approach;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the master seed");
    sub->add_option("--workers", workers, "worker threads for simulation and hierarchy stages");
    sub->add_option("--out", out, "override the output directory");
  };
  auto* generate = app.add_subcommand("generate", "simulate the source grid and the target specimens");
  auto* sobol = app.add_subcommand("sobol", "first-order Sobol indices and estimation order");
  auto* train = app.add_subcommand("train", "train one non-hierarchical approach");
  auto* hier = app.add_subcommand("hier", "run one hierarchical approach");
  auto* eval = app.add_subcommand("eval", "metric tables and scatter plots");
  auto* bench = app.add_subcommand("bench", "full pipeline");
  for (auto* sub : {generate, sobol, train, hier, eval, bench}) common(sub);
  train->add_option("--approach", approach, "cnn, dann, phydann1 or phydann2")->required();
  hier->add_option("--variant,--approach", approach, "hierdann, hierphydann1 or hierphydann2")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    auto cfg = gprda::harness::load_config(config_path);
    if (seed) gprda::harness::set_seed(cfg, *seed);
    if (workers) cfg.workers = std::max<std::size_t>(1, *workers);
    if (out) cfg.output_dir = std::filesystem::absolute(*out);
    spdlog::info("output directory {}", cfg.output_dir.string());
    if (generate->parsed()) gprda::harness::cmd_generate(cfg);
    if (sobol->parsed()) gprda::harness::cmd_sobol(cfg);
    if (train->parsed()) gprda::harness::cmd_train(cfg, approach);
    if (hier->parsed()) gprda::harness::cmd_hier(cfg, approach);
    if (eval->parsed()) gprda::harness::cmd_eval(cfg);
    if (bench->parsed()) gprda::harness::cmd_bench(cfg);
  } catch (const gprda::DependencyError& e) {
    spdlog::error("{}", e.what());
    return kDependencyError;
  } catch (const gprda::ConfigError& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  } catch (const gprda::StabilityError& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFailure;
  }
  return kOk;
}
