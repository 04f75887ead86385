#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "latrem/errors.hpp"
#include "latrem/experiment.hpp"
#include "latrem/io.hpp"

using namespace latrem;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json small_config(const std::string& out) {
  return {{"body", {{"kind", "ball"}, {"dimension", 2}}},
          {"t_grid", {{"min", 5}, {"max", 60}, {"steps", 60}}},
          {"epsilon_rule", "manual"},
          {"epsilon", 0.3},
          {"s1_t", 6},
          {"s1_N", 2},
          {"s1_term_budget", 100000},
          {"frames", false},
          {"output_dir", out}};
}

}  // namespace

TEST_CASE("body descriptors") {
  const ConvexBody b = body_from_json({{"kind", "ball"}, {"dimension", 3}, {"radius", 2.0}});
  CHECK(b.dimension() == 3);
  CHECK(b.volume() == doctest::Approx(4.0 * M_PI / 3.0 * 8.0));
  const ConvexBody e = body_from_json({{"kind", "ellipsoid"}, {"dimension", 2}, {"Q", {4, 0, 0, 1}}});
  CHECK(e.is_ellipsoid());
  CHECK(e.volume() == doctest::Approx(2.0 * M_PI));
  const ConvexBody g = body_from_json({{"kind", "generic"}, {"name", "ellipsoid"}, {"dimension", 2}, {"Q", {4, 0, 0, 1}}});
  CHECK_FALSE(g.is_ellipsoid());
  const std::vector<double> xi{0.3, -0.8};
  CHECK(g.support(xi) == doctest::Approx(e.support(xi)).epsilon(1e-12));
  CHECK_THROWS_AS(body_from_json({{"kind", "cube"}, {"dimension", 2}}), ConfigError);
  CHECK_THROWS_AS(body_from_json({{"kind", "ellipsoid"}, {"dimension", 2}, {"Q", {1, 0, 0}}}), ConfigError);
  CHECK_THROWS_AS(body_from_json({{"kind", "ball"}, {"dimension", "three"}}), ConfigError);
}

TEST_CASE("config parsing and validation") {
  json j = small_config(".");
  ExperimentConfig c = config_from_json(j);
  REQUIRE(c.t_grid.size() == 60);
  CHECK(c.t_grid.front() == doctest::Approx(5.0));
  CHECK(c.t_grid.back() == doctest::Approx(60.0));
  CHECK(c.t_grid[1] / c.t_grid[0] == doctest::Approx(c.t_grid[2] / c.t_grid[1]));
  CHECK(c.epsilon_at(10.0) == 0.3);
  CHECK(c.slope_bound == doctest::Approx(0.8));
  j["epsilon_rule"] = "formula";
  j["body"] = {{"kind", "ball"}, {"dimension", 3}};
  c = config_from_json(j);
  CHECK(c.epsilon_at(100.0) == doctest::Approx(std::pow(100.0, -29.0 / 55.0)));

  json bad = small_config(".");
  bad["t_grid"] = json::array();
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  bad = small_config(".");
  bad["epsilon"] = 1.5;
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  bad = small_config(".");
  bad["body"] = {{"kind", "ball"}, {"dimension", 4}};
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  bad = small_config(".");
  bad["epsilon_rule"] = "guess";
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  bad = small_config(".");
  bad["s1_N"] = "four";
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("experiment reruns are byte-identical") {
  const auto root = std::filesystem::temp_directory_path() / "latrem_io_test";
  std::filesystem::remove_all(root);
  std::vector<std::string> csv, dec;
  for (const char* run : {"a", "b"}) {
    const ExperimentOutcome o = run_experiment(config_from_json(small_config((root / run).string())));
    CHECK(o.exit_code() == 0);
    CHECK(o.stage_errors.empty());
    CHECK(o.failed_checks.empty());
    csv.push_back(slurp(root / run / "records.csv"));
    dec.push_back(slurp(root / run / "decomposition.csv"));
    CHECK(std::filesystem::exists(root / run / "report.json"));
  }
  CHECK_FALSE(csv[0].empty());
  CHECK(csv[0] == csv[1]);
  CHECK(dec[0] == dec[1]);
  const json rep = json::parse(slurp(root / "a" / "report.json"));
  CHECK(rep.contains("versions"));
  CHECK(rep.contains("constants"));
  CHECK(rep["seed"] == 7);
}

TEST_CASE("a failed check gives exit code 2") {
  const auto root = std::filesystem::temp_directory_path() / "latrem_io_fail";
  json j = small_config(root.string());
  j["slope_bound"] = -5.0;
  const ExperimentOutcome o = run_experiment(config_from_json(j));
  CHECK(o.exit_code() == 2);
  CHECK_FALSE(o.failed_checks.empty());
}
