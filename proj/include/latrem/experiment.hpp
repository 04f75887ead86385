#pragma once

// End-to-end experiment: counting and envelope fit, sandwich calibration,
// the R_eps cross-check, the S_1 decomposition identities, the epsilon
// balance, and frame constants, written as records.csv, decomposition.csv
// and report.json.

#include <string>
#include <vector>

#include <json.hpp>

#include "latrem/io.hpp"

namespace latrem {

struct ExperimentOutcome {
  nlohmann::json report;
  std::vector<std::string> failed_checks;
  std::vector<std::string> stage_errors;
  // 0 all checks passed, 2 a verification check failed, 1 a stage raised.
  int exit_code() const;
};

// Runs every stage; a stage that raises is recorded and the independent
// stages still run. Output is deterministic for a fixed config.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

}  // namespace latrem
