#pragma once

// Exponential-sum instances shared by the tests: bump amplitudes, cubic plus
// quadratic phases and a long double reference sum.

#include <cmath>
#include <complex>
#include <random>

#include "latrem/exp_sum.hpp"

namespace sums {

using namespace latrem;


inline double bump(std::span<const double> x, const Vec& c, double R) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) s += (x[i] - c(i)) * (x[i] - c(i));
  const double u = s / (R * R);
  return u < 1.0 ? std::exp(-1.0 / (1.0 - u)) : 0.0;
}

// G = bump on B(c, R); F = sum a_i x_i^3 / 6 + x^T A x / 2 + b.x; Omega = B(c, 1.25 R).
struct Instance {
  Vec c;
  double R = 0.25;
  Mat A;
  Vec b, a;
  PhasePair pair() const {
    PhasePair p;
    p.dimension = static_cast<int>(c.size());
    p.G = [c = c, R = R](std::span<const double> x) { return bump(x, c, R); };
    p.F = [A = A, b = b, a = a](std::span<const double> x) { return phase(A, b, a, x); };
    p.omega.centers.push_back(c);
    p.omega.radii.push_back(1.25 * R);
    p.margin = 0.25 * R;
    return p;
  }
  static double phase(const Mat& A, const Vec& b, const Vec& a, std::span<const double> x) {
    const Eigen::Map<const Vec> v(x.data(), static_cast<Eigen::Index>(x.size()));
    return (a.array() * v.array().cube()).sum() / 6.0 + 0.5 * v.dot(A * v) + b.dot(v);
  }
  // (r.D) F at y
  double d1(const Vec& r, const Vec& y) const { return (a.array() * y.array().square() * r.array()).sum() / 2.0 + r.dot(A * y + b); }
  // (r.D)(s.D) F at y
  double d2(const Vec& r, const Vec& s, const Vec& y) const { return (a.array() * y.array() * r.array() * s.array()).sum() + r.dot(A * s); }
};

inline Instance random_instance(int d, std::mt19937_64& rng, bool cubic = true) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Instance in;
  in.c = Vec(d);
  for (int i = 0; i < d; ++i) in.c(i) = 0.3 * u(rng);
  in.R = 0.2 + 0.1 * (u(rng) + 1.0);
  in.A = Mat(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) in.A(i, j) = in.A(j, i) = u(rng);
  in.b = Vec(d);
  in.a = Vec::Zero(d);
  for (int i = 0; i < d; ++i) {
    in.b(i) = u(rng);
    if (cubic) in.a(i) = u(rng);
  }
  return in;
}

// Sum in long double over every lattice point of the bounding box.
inline std::complex<long double> reference_sum(const SumSpec& s, const Instance& in) {
  const int d = static_cast<int>(in.c.size());
  const double D = s.delta * s.M;
  std::vector<std::int64_t> lo(d), hi(d), m(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = static_cast<std::int64_t>(std::floor((in.c(i) - in.R) * D)) - 1;
    hi[i] = static_cast<std::int64_t>(std::ceil((in.c(i) + in.R) * D)) + 1;
    m[i] = lo[i];
  }
  std::complex<long double> acc = 0.0L;
  std::vector<double> x(d);
  while (true) {
    for (int i = 0; i < d; ++i) x[i] = static_cast<double>(m[i]) / D;
    const double g = bump(x, in.c, in.R);
    if (g != 0.0) {
      const long double ph = -2.0L * static_cast<long double>(M_PI) * s.T * Instance::phase(in.A, in.b, in.a, x);
      acc += static_cast<long double>(g) * std::complex<long double>(std::cos(ph), std::sin(ph));
    }
    int a = d - 1;
    while (a >= 0 && m[a] == hi[a]) {
      m[a] = lo[a];
      --a;
    }
    if (a < 0) break;
    ++m[a];
  }
  return acc;
}

inline double sum_g(const SumSpec& s, const Instance& in) {
  SumSpec z = s;
  z.T = 0.0;
  return static_cast<double>(reference_sum(z, in).real());
}

}  // namespace sums
