#pragma once

// Oscillatory integrands shared by the tests.

#include <cmath>

#include "latrem/oscillatory.hpp"

namespace osc {

using namespace latrem;

// e * exp(-1 / (1 - |x - c|^2 / R^2)), equal to 1 at the centre.
inline ScalarField unit_bump(const Vec& c, double R) {
  return [c, R](std::span<const double> x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) s += (x[i] - c(i)) * (x[i] - c(i));
    const double u = s / (R * R);
    return u < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u)) : 0.0;
  };
}

// w = bump on B(c, R), f = (x - a)^T A (x - a) / 2 + g . x.
inline OscIntegrand quadratic(const Vec& c, double R, const Mat& A, const Vec& a, const Vec& g, double lambda) {
  OscIntegrand ig;
  ig.dimension = static_cast<int>(c.size());
  ig.lambda = lambda;
  ig.amplitude = unit_bump(c, R);
  ig.phase = [A, a, g](std::span<const double> x) {
    const Vec v = Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size())) - a;
    return 0.5 * v.dot(A * v) + g.dot(v + a);
  };
  ig.gradient = [A, a, g](std::span<const double> x) {
    const Vec v = Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size())) - a;
    return Vec(A * v + g);
  };
  ig.hessian = [A](std::span<const double>) { return A; };
  for (Eigen::Index i = 0; i < c.size(); ++i) ig.box.emplace_back(c(i) - R, c(i) + R);
  return ig;
}

inline double bump1(double x) { return std::abs(x) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - x * x)) : 0.0; }

}  // namespace osc
