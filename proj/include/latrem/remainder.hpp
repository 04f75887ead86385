#pragma once

// The smoothed-count pipeline: the dual-side sum R_eps(t), the dyadic and
// spherical decompositions of the first main sum S_1, coset re-summation
// into exponential-sum form, and the epsilon balance of the final bound.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latrem/convex_body.hpp"
#include "latrem/geometry_lemmas.hpp"
#include "latrem/mollifier.hpp"
#include "latrem/quadrature.hpp"
#include "latrem/rational.hpp"

namespace latrem {

// psi(y) = chi(|y|) - chi(2|y|) with chi a smooth step from 1 on [0, 1] to 0
// on [2, inf); supp psi lies in 1/2 <= |y| <= 2 and sum_j psi(y / 2^j) = 1.
class DyadicPartition {
 public:
  static double step(double s);
  double psi(double r) const;
  double psi(std::span<const double> y) const;
  // sum_{j=j0}^{j1} psi(y / 2^j).
  double partial_sum(std::span<const double> y, int j0, int j1) const;
};

// Smooth partition of unity on 1/2 <= |y| <= 2 by bumps on balls B(xi_i, r),
// r = 1/(2N). Grid centers h Z^d (h = 0.8 r / sqrt(d)) whose ball meets the
// shell are kept, radially projected into the shell when they fall outside.
class SphericalPartition {
 public:
  SphericalPartition(int dimension, std::int64_t N);

  int dimension() const { return dim_; }
  double radius() const { return r_; }
  double spacing() const { return h_; }

  struct Weight {
    IVec index;  // grid index of the patch
    double value = 0.0;
  };
  // psi_i(y) for every patch with psi_i(y) > 0.
  std::vector<Weight> weights(std::span<const double> y) const;
  // psi_i(y) for the patch with grid index `index`.
  double value(const IVec& index, std::span<const double> y) const;
  Vec center(const IVec& index) const;
  bool kept(const IVec& g) const;
  // Number of balls containing y.
  int overlap(std::span<const double> y) const;
  // Grid points within 2r of a point, an upper bound for overlap().
  int overlap_bound() const;
  // Number of patches (grid points kept).
  std::int64_t patch_count() const;
  // max |D^nu psi_i| / N^{|nu|} over |nu| = order in {1, 2}, by central
  // differences at `samples` seeded random points of the shell.
  double derivative_constant(int order, int samples, std::uint64_t seed = 11) const;

 private:
  bool kept_grid(const std::array<std::int64_t, 3>& g) const;
  double bump_grid(const std::array<std::int64_t, 3>& g, std::span<const double> y) const;
  template <class Visit>
  void for_each_bump(std::span<const double> y, Visit visit) const;
  int dim_;
  std::int64_t N_;
  double r_, h_;
};

struct REpsilonResult {
  Complex dual = 0.0;        // t^d sum_{0 < |k| <= K} chi^(t k) rho^(eps k)
  double space = 0.0;        // N_eps(t) - vol t^d
  double tail_estimate = 0.0;
  bool tail_flag = false;    // tail_estimate above the tolerance
  std::int64_t terms = 0;
};

// Ellipsoids only (closed-form chi^); d <= 3.
REpsilonResult r_epsilon_direct(const ConvexBody& body, double t, const Mollifier& mol, double k_radius,
                                double tail_tol = 1e-6, bool with_space_side = true);

// Running maximum of |rho^| beyond omega, an envelope for tail bounds.
double rho_hat_envelope(const Mollifier& mol, double omega);

struct S1Options {
  int N1 = -1;                    // default ceil(d/2) + 2
  std::int64_t term_budget = 3000000;
  double envelope_floor = 1e-15;  // stop once rho^ envelope is below this
  bool coset_check = true;
  int q = 1;                      // frame order used for the coset check
};

struct ScaleRecord {
  int j = 0;
  double M = 0.0;
  Complex value = 0.0;           // S_{1, 2^j}
  Complex patch_total = 0.0;     // sum_i S^{(i)}_{1, 2^j}
  double partition_residual = 0.0;
  std::int64_t patches = 0;
  double tail_model = 0.0;       // t^{(d-1)/2} M^{(d-1)/2} (1 + M eps)^{-N1}
  double envelope = 0.0;         // rho^ envelope at eps M / 2
};

struct CosetCheck {
  int j = 0;
  IVec patch;
  Vec xi;
  std::int64_t L = 0;
  double alpha = 0.0;
  Complex patch_value = 0.0;
  Complex resummed = 0.0;
  double residual = 0.0;
};

struct S1Assembly {
  Complex S1 = 0.0;
  std::vector<ScaleRecord> per_scale;
  std::map<std::pair<int, std::vector<std::int64_t>>, Complex> per_patch;
  Complex direct = 0.0;          // t^{(d-1)/2} sum_k chi(|k|/2^J) ... over the union of shells
  double dyadic_residual = 0.0;
  double partition_residual = 0.0;  // max over scales
  std::optional<CosetCheck> coset;
  int j_max = 0;
  bool budget_bound = false;     // term budget, not the envelope, fixed j_max
  bool tail_monotone = false;    // tail model non-increasing in j over the range
};

S1Assembly s1_assembly(const ConvexBody& body, double t, const Mollifier& mol, std::int64_t N,
                       const S1Options& opt = {});

struct EpsilonBalance {
  int d = 0;
  int q = 0;
  Rational epsilon_exponent;  // eps = t^{-epsilon_exponent}
  Rational beta;              // P << t^{d-2+beta}
  Rational second_term_t;     // t-exponent of the second term at this eps
  Rational third_term_t;      // d - 1 - epsilon_exponent
  bool balanced = false;
};

EpsilonBalance balance_epsilon(int d);

struct TermDominance {
  double first = 0.0;   // t^{d-2+1/d}
  double second = 0.0;  // t^{a} eps^{-b}
  double third = 0.0;   // t^{d-1} eps
  std::string dominant;  // largest term; ties within 1e-9 relative joined by "="
};

// The three terms of the final bound at (t, eps), for the q of balance_epsilon.
TermDominance three_term_report(int d, double t, double eps);

}  // namespace latrem
