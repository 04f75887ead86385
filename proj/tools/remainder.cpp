// remainder: end-to-end experiment driver.

#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "latrem/errors.hpp"
#include "latrem/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Smoothed lattice-count pipeline with decomposition checks"};
  app.require_subcommand(1);
  std::string config;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("--config", config, "JSON config")->required();
  CLI11_PARSE(app, argc, argv);
  try {
    const latrem::ExperimentConfig cfg = latrem::load_config(config);
    const latrem::ExperimentOutcome out = latrem::run_experiment(cfg);
    for (const auto& e : out.stage_errors) std::fprintf(stderr, "remainder: stage error: %s\n", e.c_str());
    for (const auto& c : out.failed_checks) std::fprintf(stderr, "remainder: check failed: %s\n", c.c_str());
    std::printf("wrote %s/{records.csv, decomposition.csv, report.json}; exit %d\n", cfg.output_dir.c_str(),
                out.exit_code());
    return out.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "remainder: %s\n", e.what());
    return 1;
  }
}
