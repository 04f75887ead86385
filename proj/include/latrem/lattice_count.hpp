#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "latrem/convex_body.hpp"
#include "latrem/mollifier.hpp"
#include "latrem/rational.hpp"

namespace latrem {

// Number of lattice points k with gauge(k) <= t (closed dilate) by full
// enumeration of the bounding box. Throws ResourceError above 1e9 work.
std::int64_t count_bruteforce(const ConvexBody& body, double t, int workers = 0);

// Same value as count_bruteforce, counting integer intervals on each fiber
// of the last coordinate and recursing on projected ellipsoids for the outer
// coordinates. Ellipsoids only.
std::int64_t count_sliced(const ConvexBody& body, double t, int workers = 0);

struct CountRecord {
  double t = 0.0;
  std::int64_t count = 0;
  double main_term = 0.0;  // vol(B) t^d
  double remainder = 0.0;  // count - main_term
};

std::vector<CountRecord> remainder_series(const ConvexBody& body, std::span<const double> t_grid, int workers = 0);

struct ExponentFit {
  std::vector<std::pair<double, double>> samples;  // (log block center, log block max |P|)
  double slope = 0.0;
  double intercept = 0.0;
  int block = 1;  // blocks per doubling of t
};

// Least-squares slope of log(max |P| over a block) against log(block center).
// Blocks are (t0 2^{b/block}, t0 2^{(b+1)/block}] anchored at the smallest t;
// a trailing block covering less than half its log-width is dropped.
ExponentFit fit_envelope_exponent(std::span<const double> t, std::span<const double> remainder, int block);
ExponentFit fit_envelope_exponent(std::span<const CountRecord> records, int block);

// N_eps(t) = sum_k (chi_{tB} * rho_eps)(k), d in {2, 3}.
double mollified_count(const ConvexBody& body, double t, const Mollifier& mol);

// (chi_{tB} * rho_eps)(k) for a single point.
double mollified_indicator(const ConvexBody& body, double t, const Mollifier& mol, std::span<const double> k);

struct SandwichResult {
  bool holds = false;
  double lower_margin = 0.0;  // count - N_eps(t - C1 eps)
  double upper_margin = 0.0;  // N_eps(t + C1 eps) - count
};

SandwichResult sandwich_check(const ConvexBody& body, double t, const Mollifier& mol, double c1);

// Smallest C1 in {0.5, 1, 2, 4, ...} for which sandwich_check holds on the
// whole (t, eps) grid.
double calibrate_c1(const ConvexBody& body, std::span<const double> t_grid, std::span<const double> eps_grid);

struct ExponentTable {
  Rational hlawka;
  Rational muller_lambda;
  Rational beta;
  Rational conjecture;         // 0
  bool conjecture_epsilon = false;  // conjecture is "arbitrary eps > 0" for d = 3, 4
};

ExponentTable exponent_table(int d);

}  // namespace latrem
