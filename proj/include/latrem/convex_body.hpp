#pragma once

// Smooth convex bodies containing the origin, described through their gauge
// (Minkowski functional) and support function H(xi) = sup_{x in B} <xi, x>.
//
// Ellipsoids {x : x^T Q^{-1} x <= 1} are first-class: H(xi) = sqrt(xi^T Q xi)
// and every derivative jet is exact truncated Taylor arithmetic. Other bodies
// are supplied as callables and get finite-difference jets.

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latrem/jet.hpp"

namespace latrem {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using ScalarField = std::function<double(std::span<const double>)>;
using JetField = std::function<Jet(const std::vector<Jet>&)>;

// All partial derivatives D^nu H(xi), |nu| <= order; D^nu = jet.derivative(nu).
using DerivativeJet = Jet;

struct GenericBodySpec {
  std::string name;
  int dimension = 0;
  ScalarField support;
  ScalarField gauge;
  double circumradius = 0.0;  // upper bound on max |x| over the body
  double inradius = 0.0;      // lower bound on min |x| over the boundary
  std::optional<double> volume;
  // Optional Taylor-arithmetic version of the support function; when present
  // jets are exact instead of finite differences.
  JetField support_jet;
};

struct HessianSpectrum {
  double zero_eig = 0.0;
  std::vector<double> others;  // ascending
  Vec null_vector;             // unit eigenvector of the near-zero eigenvalue
  double c = 0.0;              // min of others * |xi|
  double C = 0.0;              // max of others * |xi|
};

class ConvexBody {
 public:
  static ConvexBody ellipsoid(const Mat& q);
  static ConvexBody ball(int dimension, double radius = 1.0);
  static ConvexBody generic(GenericBodySpec spec);

  int dimension() const { return dim_; }
  bool is_ellipsoid() const { return ellipsoid_; }
  const std::string& name() const { return name_; }
  const Mat& q_matrix() const { return q_; }
  const Mat& q_inverse() const { return q_inv_; }

  double gauge(std::span<const double> x) const;
  // Closed-dilate membership gauge(x) <= t; ellipsoids compare x^T Q^{-1} x <= t^2.
  bool contains(std::span<const double> x, double t) const;
  double circumradius() const { return circumradius_; }
  double inradius() const { return inradius_; }

  double support(std::span<const double> xi) const;
  DerivativeJet support_jet(std::span<const double> xi, int order) const;
  Vec boundary_point(std::span<const double> xi) const;
  double gauss_curvature(std::span<const double> xi) const;
  double volume() const { return volume_; }
  HessianSpectrum hessian_spectrum_check(std::span<const double> xi) const;

  // Hessian D^2 H(xi), closed form for ellipsoids.
  Mat support_hessian(std::span<const double> xi) const;
  // Taylor jet of H at xi without the C_1^+ precondition (used internally by
  // callers that already control the radius).
  Jet support_jet_unchecked(std::span<const double> xi, int order) const;

 private:
  ConvexBody() = default;
  void check_direction(std::span<const double> xi) const;

  int dim_ = 0;
  bool ellipsoid_ = false;
  std::string name_;
  Mat q_, q_inv_;
  double det_q_ = 1.0;
  GenericBodySpec generic_;
  double volume_ = 0.0;
  double circumradius_ = 0.0;
  double inradius_ = 0.0;
};

// Volume of the unit Euclidean ball in R^d.
double unit_ball_volume(int d);

// Registered generic bodies: "ball" (params: radius) through the generic
// path, "lp" (params: p) the unit l^p ball whose boundary has flat points on
// the axes when p != 2.
ConvexBody registered_generic_body(const std::string& name, int dimension, double param);

}  // namespace latrem
