#pragma once

// Integer frames adapted to a direction xi of the support-function shell,
// the coset decomposition of Z^d they induce, and radii for a quantitative
// inverse function theorem.

#include <functional>
#include <string>
#include <vector>

#include "latrem/convex_body.hpp"
#include "latrem/smith.hpp"

namespace latrem {

struct FrameConstruction {
  Vec xi;
  Mat P;                    // orthogonal columns, P.col(0) = xi, |P_l| = |xi|
  Mat A;                    // Hessian of y -> H(P y) at e_1
  Vec lambda;               // nonzero eigenvalues of A, ascending
  Mat w_prime;              // d x (d-1) eigenvectors, first components zero
  double alpha = 0.0;
  Mat W;                    // (w'_1 + alpha e_1, w'_2, ..., w'_{d-1}, e_1)
  Mat v_star;               // P W
};

struct IntegerFrame {
  IMat V;                   // columns v_l = N v**_l
  std::int64_t N = 0;
  std::int64_t det_v = 0;
  std::int64_t L = 0;       // |det V|
};

struct GMatrix {
  int k = 0;
  Mat g;                    // g^{(k)}_{i,j}, 0-based
  double h = 0.0;           // det g
};

struct PatternReport {
  bool passed = false;
  std::string failure;      // entry class that failed, empty on success
  int k = 0;
  std::int64_t N = 0;
  double h_ratio = 0.0;     // |h_k| / N^{(k+2)d}
  double h_reference = 0.0; // |h_k(xi, v*)|
  std::vector<double> diag_ratio;   // g_{i,i} / N^{k+2}, i < d-1
  double corner_ratio = 0.0;        // g_{d,1} / N^{k+2}
  double offdiag_max = 0.0;         // max |g_{i,j}| / N^{k+2}, 2 <= i <= d-1, j < i
  double last_row_scaled = 0.0;     // N * max_{j >= 2} |g_{d,j}| / N^{k+2}
  double deviation = 0.0;           // Frobenius |g / N^{k+2} - b(alpha)|
};

struct FrameOptions {
  bool enforce_threshold = true;  // throw ThresholdError if the size pattern fails
  double alpha_start = 2.0;
};

struct FrameResult {
  FrameConstruction construction;
  IntegerFrame frame;
};

// Steps 1-3 of the frame construction for xi with 1/2 <= |xi| <= 2.
FrameResult build_frame(const ConvexBody& body, std::span<const double> xi, int q, std::int64_t N,
                        const FrameOptions& opt = {});

// g^{(k)}_{i,j}(y, v_1..v_d) = d^{k+2} F / du_1 du_i du_j du_d^{k-1} at 0 for
// F(u) = H(y + sum u_l v_l), with real direction columns.
GMatrix g_matrix(const ConvexBody& body, std::span<const double> y, const Mat& v, int k);
GMatrix g_matrix(const ConvexBody& body, std::span<const double> y, const IntegerFrame& frame, int k);

// Size pattern of g^{(k)} for the integer frame at y, measured against the
// frozen-scale reference g^{(k)}(xi, v*).
PatternReport verify_size_pattern(const ConvexBody& body, const FrameResult& fr, std::span<const double> y, int k);

// Pattern check over xi, k <= q and y in {xi, xi +- e_l / (2N)}.
bool frame_pattern_holds(const ConvexBody& body, const FrameResult& fr, int q);

// Smallest power of two N >= n_min for which the pattern holds for every xi
// in the net; throws ThresholdError if none up to n_max.
std::int64_t find_a3(const ConvexBody& body, const std::vector<Vec>& xi_net, int q, std::int64_t n_min = 1,
                     std::int64_t n_max = 1 << 16);

// Deterministic net of directions on the unit sphere (points of C_1).
std::vector<Vec> direction_net(int d, int count);

struct CosetDecomposition {
  std::vector<IVec> reps;
  SmithForm snf;
  // Index of the coset containing k.
  std::int64_t coset_of(const IVec& k) const;
};

CosetDecomposition coset_decomposition(const IMat& v);
CosetDecomposition coset_decomposition(const IntegerFrame& frame);

struct InverseFnRadii {
  double c = 0.0;
  double C = 0.0;
  int d = 0;
  double r0 = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  // r2 is linear in r1: r2 = ratio * r1.
  double ratio() const;
  // Radii after shrinking r1 to r1_prime <= r1.
  InverseFnRadii rescaled(double r1_prime) const;
};

InverseFnRadii inverse_fn_radii(double c, double C, int d, double r0);

using VecField = std::function<Vec(const Vec&)>;
using JacobianField = std::function<Mat(const Vec&)>;

struct BijectivityReport {
  bool passed = false;
  int samples = 0;
  int solved = 0;
  int max_iterations = 0;
  int collisions = 0;     // distinct preimages found from different starts
  double worst_radius = 0.0;  // max |x - a| / r1 over solutions
  std::string counterexample;
};

// Solves f(x) = y by Newton from a for samples y in B(f(a), r2).
BijectivityReport verify_bijectivity(const VecField& f, const JacobianField& df, const Vec& a,
                                     const InverseFnRadii& radii, int samples = 1000);

}  // namespace latrem
