#include "latrem/io.hpp"

#include <cmath>
#include <fstream>

#include "latrem/errors.hpp"

namespace latrem {

namespace {

Mat q_from(const nlohmann::json& j, int d) {
  if (!j.contains("Q") || !j["Q"].is_array()) throw ConfigError("body descriptor needs a row-major \"Q\" array");
  const auto& a = j["Q"];
  if (static_cast<int>(a.size()) != d * d) throw ConfigError("\"Q\" must have dimension^2 entries");
  Mat q(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) q(r, c) = a[r * d + c].get<double>();
  return q;
}

std::vector<double> doubles(const nlohmann::json& j, const char* key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  if (!j[key].is_array()) throw ConfigError(std::string("\"") + key + "\" must be an array");
  for (const auto& v : j[key]) out.push_back(v.get<double>());
  return out;
}

ConvexBody parse_body(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("dimension"))
    throw ConfigError("body descriptor needs \"kind\" and \"dimension\"");
  const std::string kind = j["kind"].get<std::string>();
  const int d = j["dimension"].get<int>();
  if (kind == "ball") return ConvexBody::ball(d, j.value("radius", 1.0));
  if (kind == "ellipsoid") return ConvexBody::ellipsoid(q_from(j, d));
  if (kind == "generic") {
    const std::string name = j.value("name", std::string());
    if (name != "ellipsoid") throw ConfigError("unknown generic body \"" + name + "\"");
    const ConvexBody e = ConvexBody::ellipsoid(q_from(j, d));
    GenericBodySpec s;
    s.name = "generic-ellipsoid";
    s.dimension = d;
    s.support = [e](std::span<const double> xi) { return e.support(xi); };
    s.gauge = [e](std::span<const double> x) { return e.gauge(x); };
    s.circumradius = e.circumradius();
    s.inradius = e.inradius();
    s.volume = e.volume();
    return ConvexBody::generic(std::move(s));
  }
  throw ConfigError("unknown body kind \"" + kind + "\"");
}

}  // namespace

ConvexBody body_from_json(const nlohmann::json& j) {
  try {
    return parse_body(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("body descriptor has the wrong type: ") + e.what());
  }
}

void ExperimentConfig::validate() const {
  if (t_grid.empty()) throw ConfigError("t_grid must be nonempty");
  for (double t : t_grid)
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("t_grid entries must be finite and >= 0");
  if (d < 2 || d > 3) throw ConfigError("experiments run in dimension 2 or 3");
  if (epsilon_rule != "formula" && epsilon_rule != "manual")
    throw ConfigError("epsilon_rule must be \"formula\" or \"manual\"");
  if (epsilon_rule == "manual" && !(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  for (double e : sandwich_eps)
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("sandwich_eps entries must lie in (0, 1)");
  if (sandwich_t.empty() != sandwich_eps.empty())
    throw ConfigError("sandwich_t and sandwich_eps must both be given or both omitted");
  for (double t : r_eps_t) {
    const double e = epsilon_at(t);
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("epsilon rule gives eps outside (0, 1) at an r_eps_t entry");
  }
  const double e = epsilon_at(s1_t);
  if (!(e > 0.0 && e < 1.0)) throw ConfigError("epsilon rule gives eps outside (0, 1) at s1_t");
  if (fit_block < 1) throw ConfigError("fit_block must be >= 1");
  if (s1_N < 1) throw ConfigError("s1_N must be >= 1");
  if (!(k_radius_factor > 0.0)) throw ConfigError("k_radius_factor must be positive");
}

double ExperimentConfig::epsilon_at(double t) const {
  if (epsilon_rule == "manual") return epsilon;
  const double d3 = d * d * d;
  return std::pow(t, -(d3 + 2.0 * d - 4.0) / (d3 + d * d + 5.0 * d + 4.0));
}

namespace {

ExperimentConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  if (!j.contains("body")) throw ConfigError("config needs a \"body\" descriptor");
  c.body_descriptor = j["body"];
  body_from_json(c.body_descriptor);
  c.d = c.body_descriptor["dimension"].get<int>();
  if (!j.contains("t_grid")) throw ConfigError("config needs \"t_grid\"");
  if (j["t_grid"].is_object()) {
    // {"min": a, "max": b, "steps": n}, geometric in t.
    const auto& g = j["t_grid"];
    const double a = g.at("min").get<double>(), b = g.at("max").get<double>();
    const int n = g.at("steps").get<int>();
    if (!(a > 0.0) || !(b >= a) || n < 1) throw ConfigError("t_grid range needs 0 < min <= max and steps >= 1");
    for (int i = 0; i < n; ++i) c.t_grid.push_back(n == 1 ? a : a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
  } else {
    c.t_grid = doubles(j, "t_grid");
  }
  c.fit_block = j.value("fit_block", c.fit_block);
  c.slope_bound = j.value("slope_bound", c.d - 1.2);
  c.epsilon_rule = j.value("epsilon_rule", c.epsilon_rule);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.N1 = j.value("N1", c.N1);
  c.k_radius_factor = j.value("k_radius_factor", c.k_radius_factor);
  c.cross_tolerance = j.value("cross_tolerance", c.cross_tolerance);
  c.r_eps_t = doubles(j, "r_eps_t");
  c.sandwich_t = doubles(j, "sandwich_t");
  c.sandwich_eps = doubles(j, "sandwich_eps");
  c.s1_t = j.value("s1_t", c.s1_t);
  c.s1_N = j.value("s1_N", c.s1_N);
  c.s1_term_budget = j.value("s1_term_budget", c.s1_term_budget);
  c.frames = j.value("frames", c.frames);
  c.seed = j.value("seed", c.seed);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.validate();
  return c;
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  try {
    return parse_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace latrem
