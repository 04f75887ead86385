#pragma once

// Independent reference computations shared by the tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// sum over the integer box of [x^T Q^{-1} x <= t^2], straight loops in long double.
inline std::int64_t count_ellipsoid(const Eigen::MatrixXd& q, double t) {
  const int d = static_cast<int>(q.rows());
  const Eigen::MatrixXd qi = q.inverse();
  std::vector<std::int64_t> r(d);
  for (int i = 0; i < d; ++i) r[i] = static_cast<std::int64_t>(std::floor(t * std::sqrt(q(i, i)))) + 1;
  std::vector<std::int64_t> k(d);
  for (int i = 0; i < d; ++i) k[i] = -r[i];
  std::int64_t n = 0;
  while (true) {
    long double s = 0.0L;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) s += static_cast<long double>(k[a]) * qi(a, b) * static_cast<long double>(k[b]);
    if (s <= static_cast<long double>(t) * t * (1.0L + 1e-15L)) ++n;
    int a = d - 1;
    while (a >= 0 && k[a] == r[a]) {
      k[a] = -r[a];
      --a;
    }
    if (a < 0) break;
    ++k[a];
  }
  return n;
}

// Random SPD matrix with eigenvalues in [lo, hi].
inline Eigen::MatrixXd random_spd(int d, std::mt19937_64& rng, double lo = 0.5, double hi = 2.0) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd o = qr.householderQ();
  Eigen::VectorXd ev(d);
  for (int i = 0; i < d; ++i) ev(i) = u(rng);
  return o * ev.asDiagonal() * o.transpose();
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5)), dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace oracle
