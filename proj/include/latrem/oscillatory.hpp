#pragma once

// Oscillatory integrals I(lambda) = int w(x) exp(i lambda f(x)) dx: a direct
// tensor Gauss-Legendre oracle, critical points of f, the stationary-phase
// leading term (optionally with its first correction), decay slopes, and
// the two-term model of the Fourier transform of a convex body's indicator.

#include <functional>
#include <optional>
#include <vector>

#include "latrem/convex_body.hpp"
#include "latrem/quadrature.hpp"

namespace latrem {

using GradientField = std::function<Vec(std::span<const double>)>;
using HessianField = std::function<Mat(std::span<const double>)>;

struct OscIntegrand {
  int dimension = 1;
  double lambda = 1.0;
  ScalarField amplitude;  // w, vanishing outside the box
  ScalarField phase;      // f
  std::vector<std::pair<double, double>> box;  // axis-aligned K containing supp w

  // Optional exact derivatives; finite differences are used otherwise.
  GradientField gradient;
  HessianField hessian;
  JetField amplitude_jet;
  JetField phase_jet;

  // Optional separable structure w = prod w_i(x_i), f = sum f_i(x_i); the
  // integral then factors into one-dimensional integrals.
  std::vector<std::function<double(double)>> amplitude_factors;
  std::vector<std::function<double(double)>> phase_terms;

  bool separable() const { return !amplitude_factors.empty(); }
};

struct CriticalPoint {
  Vec x0;
  Mat hessian;
  int signature = 0;
  double det_abs = 0.0;
  int hits = 0;  // Newton starts that converged here
};

// Tensor Gauss-Legendre with about sqrt(lambda) panels per axis, doubled
// until successive levels agree to tol. d <= 3, lambda <= 1e5.
Complex integrate_direct(const OscIntegrand& ig, double tol = 1e-12);

// Damped Newton on grad f from a grid of starts in the box; points are
// merged within the inverse-function radius r1 at the critical point.
std::vector<CriticalPoint> find_critical_points(const OscIntegrand& ig,
                                                const std::vector<std::pair<double, double>>& search_box,
                                                int starts_per_axis = 12);

// lambda^{-d/2} a_0, plus lambda^{-d/2-1} a_1 when with_correction is set.
Complex stationary_leading_term(const OscIntegrand& ig, const CriticalPoint& cp, bool with_correction = false);

enum class DecayMode { stationary, nonstationary };

struct DecayFit {
  std::vector<double> lambdas;
  std::vector<double> errors;  // |I - predicted| or |I|
  double slope = 0.0;
};

// Log-log slope over a lambda grid spanning at least two decades.
DecayFit decay_slope(const std::function<OscIntegrand(double)>& family, std::span<const double> lambdas,
                     DecayMode mode, double tol = 1e-13);

struct ChiHatModel {
  Complex leading;         // C K^{-1/2} e(H(xi)) |xi|^{-(d+1)/2}
  Complex with_conjugate;  // plus the C' K_{-xi}^{-1/2} e(-H(-xi)) term
};

// Two-term model of chi_B^(xi) for |xi| >= 2; e(x) = exp(-2 pi i x).
ChiHatModel chi_hat_expansion(const ConvexBody& body, std::span<const double> xi);

struct ChiHatConstants {
  Complex C, C_prime;
};

// C and C' for dimension d, least-squares calibrated once against the unit
// ball oracle and cached.
ChiHatConstants chi_hat_constants(int d);

// chi_{unit ball}^ at radius rho by radial quadrature of the Bessel integral
//   2 pi rho^{1-d/2} int_0^1 J_{d/2-1}(2 pi rho r) r^{d/2} dr.
double chi_hat_ball_oracle(int d, double rho);

// Closed form J_{d/2}(2 pi rho) / rho^{d/2}.
double chi_hat_ball(int d, double rho);

// chi_B^(xi) for an ellipsoid, sqrt(det Q) chi_ball^(|Q^{1/2} xi|).
double chi_hat_ellipsoid(const ConvexBody& body, std::span<const double> xi);

}  // namespace latrem
