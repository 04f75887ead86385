#pragma once

// JSON descriptors for bodies and experiment configurations.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "latrem/convex_body.hpp"

namespace latrem {

// {"kind": "ball", "dimension": d, "radius": r}
// {"kind": "ellipsoid", "dimension": d, "Q": [row-major d*d]}
// {"kind": "generic", "name": "ellipsoid", "dimension": d, "Q": [...]}
//   the same ellipsoid through the generic (callable) code path.
ConvexBody body_from_json(const nlohmann::json& j);

struct ExperimentConfig {
  nlohmann::json body_descriptor;
  int d = 0;
  std::vector<double> t_grid;          // counting and envelope fit; JSON list or {min, max, steps}
  int fit_block = 2;
  double slope_bound = 0.0;            // fit slope check; default d - 1.2
  std::string epsilon_rule = "formula";  // "formula": eps = t^{-(d^3+2d-4)/(d^3+d^2+5d+4)}; "manual"
  double epsilon = 0.2;                // used by the manual rule
  int N1 = -1;                         // default ceil(d/2) + 2
  double k_radius_factor = 130.0;      // dual truncation |k| <= factor / eps
  double cross_tolerance = 1e-6;       // |dual - space| in the R_eps cross-check
  std::vector<double> r_eps_t;         // t values for the R_eps cross-check
  std::vector<double> sandwich_t;
  std::vector<double> sandwich_eps;
  double s1_t = 10.0;
  std::int64_t s1_N = 4;
  std::int64_t s1_term_budget = 2000000;
  bool frames = true;                  // A3 and alpha calibration
  std::uint64_t seed = 7;
  std::string output_dir = ".";

  void validate() const;
  double epsilon_at(double t) const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

}  // namespace latrem
