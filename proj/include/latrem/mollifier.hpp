#pragma once

#include <memory>
#include <span>

namespace latrem {

// Radial bump rho(u) = c * exp(-1 / (1 - |u|^2)) on |u| < 1, with c fixed
// numerically so that int rho = 1, and its dilate
// rho_eps(y) = eps^{-d} rho(y / eps).
//
// The Fourier transform rho^(omega) = int rho(x) e^{-2 pi i x.omega} dx is
// tabulated on a radial grid (cubic Hermite interpolation) and shared by all
// mollifiers of the same dimension.
class Mollifier {
 public:
  struct Tables;

  Mollifier(int dimension, double epsilon);

  int dimension() const { return dim_; }
  double epsilon() const { return eps_; }
  double normalization() const;

  // rho at |u| = r (undilated).
  double profile(double r) const;
  double value(std::span<const double> u) const;
  // Mass of rho per unit solid angle between radii 0 and s:
  //   int_0^s c exp(-1/(1-r^2)) r^{d-1} dr, so that radial_mass(1) * |S^{d-1}| = 1.
  double radial_mass(double s) const;
  double sphere_area() const;

  // rho^ at radius omega (undilated); rho_eps^(k) = fourier(eps * |k|).
  double fourier(double omega) const;
  // Independent evaluation through the Hankel-transform integral
  //   rho^(omega) = 2 pi omega^{1-d/2} int_0^1 rho(r) J_{d/2-1}(2 pi omega r) r^{d/2} dr.
  double fourier_direct(double omega) const;
  // Largest omega covered by the interpolation table.
  double fourier_table_limit() const;

 private:
  int dim_;
  double eps_;
  std::shared_ptr<const Tables> tables_;
};

}  // namespace latrem
