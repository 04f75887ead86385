#pragma once

// Exponential sums S(T, M; G, F) = sum_m G(m / M) e(T F(m / M)) with
// e(x) = exp(-2 pi i x), Weyl differencing, and the Poisson dual form.

#include <vector>

#include "latrem/convex_body.hpp"
#include "latrem/oscillatory.hpp"
#include "latrem/rational.hpp"
#include "latrem/smith.hpp"

namespace latrem {

struct SumSpec {
  double T = 1.0;
  double M = 2.0;
  double delta = 1.0;  // lattice spacing is 1 / (delta M)
  void validate() const;
};

// Intersection of closed balls {x : |A_i x - c_i| <= R_i}; A_i is the
// identity when `maps` is empty.
struct BallRegion {
  std::vector<Vec> centers;
  std::vector<double> radii;
  std::vector<Mat> maps;

  // Membership in the region shrunk by `shrink` (conservative for maps).
  bool contains(std::span<const double> x, double shrink = 0.0) const;
  // min_i (R_i - |A_i x - c_i|) / |A_i|, a lower bound for the distance to
  // the complement of interior x (exact without maps).
  double depth(std::span<const double> x) const;
  // Axis-aligned box containing the region shrunk by `shrink`.
  std::vector<std::pair<double, double>> bounding_box(double shrink = 0.0) const;
  BallRegion translated(const Vec& s) const;
};

struct PhasePair {
  int dimension = 1;
  ScalarField G;
  ScalarField F;
  BallRegion omega;
  double margin = 0.0;  // supp G lies in omega shrunk by margin
  GradientField F_gradient;
  HessianField F_hessian;
  void validate() const;
};

// Differenced pair for one tuple (h_1..h_q).
struct DifferencedPair {
  std::vector<std::int64_t> h;
  double script_h = 1.0;  // prod h_l
  PhasePair pair;
};

struct TransformedSum {
  int q = 1;
  std::vector<IVec> shifts;
  double H = 1.0;
  std::vector<double> H_l;  // H_l = H^{2^{l-q}}
  SumSpec spec;
  PhasePair base;
  std::vector<std::vector<std::int64_t>> tuples;

  DifferencedPair differenced(const std::vector<std::int64_t>& h) const;
  // T-parameter of the differenced sum, script_h T (delta M)^{-q}.
  double T_of(const std::vector<std::int64_t>& h) const;
};

Complex eval_sum(const SumSpec& spec, const PhasePair& pp);

struct WeylIdentity {
  double lhs = 0.0;       // |S|^2
  double rhs = 0.0;       // sum over all differences h in Z^d
  double line_lhs = 0.0;  // sum over lines m0 + Z r of |S_line|^2
  double line_rhs = 0.0;  // sum over h in Z of pair sums along r
};

WeylIdentity weyl_difference_identity(const SumSpec& spec, const PhasePair& pp, const IVec& r);

TransformedSum a_process(const SumSpec& spec, const PhasePair& pp, int q, const std::vector<IVec>& shifts, double H);

// F_q(x) = int_{[0,1]^q} (r_1.D)...(r_q.D) F(x + sum t_l h_l r_l / (delta M)) dt
// by tensor Gauss-Legendre, given the q-th directional derivative.
double fq_integral_form(const TransformedSum& ts, const std::vector<std::int64_t>& h,
                        const std::function<double(std::span<const double>)>& directional_derivative,
                        std::span<const double> x, int points = 12);

struct WeylInequality {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

WeylInequality verify_weyl_inequality(const SumSpec& spec, const PhasePair& pp, int q, const std::vector<IVec>& shifts,
                                      double H);

// 2 max |grad F| over a grid of the support, the A0 of the dual split.
double phase_gradient_bound(const PhasePair& pp, int grid = 24);

// sum_{|p| <= p_radius} (delta M)^d int G(x) e(T F(x) - delta M x.p) dx.
Complex poisson_dual(const SumSpec& spec, const PhasePair& pp, double p_radius, double tol = 1e-13);

double b_process_ratio(const SumSpec& spec, const PhasePair& pp, int grid = 24);

struct TheoremExponents {
  int d = 0, q = 0;
  Rational w;
  Rational aqb_T, aqb_M;    // |S| << T^{aqb_T} M^{aqb_M}
  Rational abab_T, abab_M;  // |S| << T^{abab_T} M^{abab_M}
  Rational aqb_restriction_lo;  // T >= M^{.}
  Rational restriction_lo, restriction_hi;
};

TheoremExponents theorem_exponents(int d, int q);

struct DeltaScanRow {
  double delta = 0.0;
  double min_det = 0.0;  // min |det D^2 F_q| over support grid and tuples
};

struct DeltaScan {
  std::vector<DeltaScanRow> rows;
  double reference = 0.0;  // min |det a^{(q)}| over the support grid
  double threshold = 0.0;  // largest scanned delta below which min_det >= reference / 2 throughout
};

// Scans delta downward with r_1 = e_1, r_l = e_d (l >= 2) and H = delta M / 4,
// tracking the Hessian determinant of the differenced phase.
DeltaScan delta_threshold_scan(const PhasePair& pp, int q, double M, std::span<const double> deltas, int grid = 8);

}  // namespace latrem
