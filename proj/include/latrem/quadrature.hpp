#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace latrem {

using Complex = std::complex<double>;

// Neumaier-compensated accumulator; results depend only on the order terms
// are added in.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class CompensatedComplexSum {
 public:
  void add(Complex z) {
    re_.add(z.real());
    im_.add(z.imag());
  }
  Complex value() const { return {re_.value(), im_.value()}; }

 private:
  CompensatedSum re_, im_;
};

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule (cached, thread-safe).
const GaussRule& gauss_legendre(int n);

// Composite Gauss-Legendre over [a, b] split into `panels` equal panels.
double integrate_composite(const std::function<double(double)>& f, double a, double b, int panels, int points = 16);
Complex integrate_composite_complex(const std::function<Complex(double)>& f, double a, double b, int panels,
                                    int points = 16);

// Adaptive Gauss-Kronrod (7/15) integration; throws NumericError when the
// requested tolerance is not reached within max_depth bisections.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                          double rel_tol = 0.0, int max_depth = 40);

// exp(-2 pi i x) with argument reduction modulo 1.
Complex unit_phase(double x);

}  // namespace latrem
