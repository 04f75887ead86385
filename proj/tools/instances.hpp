#pragma once

// JSON instance descriptors shared by the command-line tools.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "latrem/errors.hpp"
#include "latrem/exp_sum.hpp"
#include "latrem/io.hpp"
#include "latrem/oscillatory.hpp"

namespace tools {

using latrem::Mat;
using latrem::Vec;

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw latrem::ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw latrem::ConfigError(path + ": " + e.what());
  }
}

inline Vec vec_of(const nlohmann::json& j, int d, const char* key) {
  Vec v = Vec::Zero(d);
  if (!j.contains(key)) return v;
  if (static_cast<int>(j[key].size()) != d) throw latrem::ConfigError(std::string("\"") + key + "\" has wrong length");
  for (int i = 0; i < d; ++i) v(i) = j[key][i].get<double>();
  return v;
}

inline Mat mat_of(const nlohmann::json& j, int d, const char* key) {
  if (!j.contains(key)) return Mat::Identity(d, d);
  if (static_cast<int>(j[key].size()) != d * d) throw latrem::ConfigError(std::string("\"") + key + "\" needs d*d entries");
  Mat m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = j[key][r * d + c].get<double>();
  return m;
}

// exp(-1 / (1 - |x - c|^2 / R^2)) on the open ball B(c, R).
struct Bump {
  Vec c;
  double R = 1.0;
  double operator()(std::span<const double> x) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) s += (x[i] - c(i)) * (x[i] - c(i));
    const double u = s / (R * R);
    return u < 1.0 ? std::exp(-1.0 / (1.0 - u)) : 0.0;
  }
};

// Phase descriptor: {"kind": "quadratic", "A": [...], "b": [...]} for
// x^T A x / 2 + b.x, or {"kind": "support", "body": {...}} for H(x).
struct Phase {
  Mat A;
  Vec b;
  std::shared_ptr<latrem::ConvexBody> body;

  double value(std::span<const double> x) const {
    if (body) return body->support(x);
    const Vec v = Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size()));
    return 0.5 * v.dot(A * v) + b.dot(v);
  }
};

inline Phase phase_of(const nlohmann::json& j, int d) {
  Phase p;
  const std::string kind = j.value("kind", std::string("quadratic"));
  if (kind == "quadratic") {
    p.A = mat_of(j, d, "A");
    p.b = vec_of(j, d, "b");
  } else if (kind == "support") {
    p.body = std::make_shared<latrem::ConvexBody>(latrem::body_from_json(j.at("body")));
    if (p.body->dimension() != d) throw latrem::ConfigError("phase body dimension mismatch");
  } else {
    throw latrem::ConfigError("unknown phase kind \"" + kind + "\"");
  }
  return p;
}

// {"dimension": d, "T": .., "M": .., "delta": .., "phase": {...},
//  "bump": {"center": [...], "radius": R}}; Omega = B(c, 1.25 R), margin R / 4.
struct SumInstance {
  latrem::SumSpec spec;
  latrem::PhasePair pair;
  nlohmann::json raw;
};

inline SumInstance sum_instance(const nlohmann::json& j) {
  SumInstance s;
  s.raw = j;
  const int d = j.at("dimension").get<int>();
  s.spec.T = j.value("T", 1.0);
  s.spec.M = j.value("M", 16.0);
  s.spec.delta = j.value("delta", 1.0);
  const auto& bj = j.at("bump");
  Bump bump{vec_of(bj, d, "center"), bj.value("radius", 0.25)};
  const Phase ph = phase_of(j.at("phase"), d);
  s.pair.dimension = d;
  s.pair.G = bump;
  s.pair.F = [ph](std::span<const double> x) { return ph.value(x); };
  if (!ph.body) {
    s.pair.F_gradient = [ph](std::span<const double> x) {
      const Vec v = Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size()));
      return Vec(ph.A * v + ph.b);
    };
    s.pair.F_hessian = [ph](std::span<const double>) { return ph.A; };
  }
  s.pair.omega.centers.push_back(bump.c);
  s.pair.omega.radii.push_back(1.25 * bump.R);
  s.pair.margin = 0.25 * bump.R;
  return s;
}

// {"dimension": d, "phase": {...quadratic}, "bump": {...}}: integrand
// w = bump, f = phase on the bump's bounding box.
inline latrem::OscIntegrand osc_instance(const nlohmann::json& j, double lambda) {
  const int d = j.at("dimension").get<int>();
  const auto& bj = j.at("bump");
  Bump bump{vec_of(bj, d, "center"), bj.value("radius", 1.0)};
  const Phase ph = phase_of(j.at("phase"), d);
  latrem::OscIntegrand ig;
  ig.dimension = d;
  ig.lambda = lambda;
  ig.amplitude = bump;
  ig.phase = [ph](std::span<const double> x) { return ph.value(x); };
  for (int i = 0; i < d; ++i) ig.box.emplace_back(bump.c(i) - bump.R, bump.c(i) + bump.R);
  if (!ph.body) {
    ig.gradient = [ph](std::span<const double> x) {
      const Vec v = Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size()));
      return Vec(ph.A * v + ph.b);
    };
    ig.hessian = [ph](std::span<const double>) { return ph.A; };
  }
  return ig;
}

}  // namespace tools
