#pragma once

// Truncated multivariate Taylor polynomials.
//
// A Jet of dimension d and order K stores the coefficients c_nu of
//   p(h) = sum_{|nu| <= K} c_nu h^nu
// so that for a smooth f expanded at x0, c_nu = D^nu f(x0) / nu!.
// Arithmetic on Jets is exact truncated power-series arithmetic, which gives
// closed-form derivative jets for anything built from +, *, / and the
// elementary functions below.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace latrem {

using MultiIndex = std::vector<int>;

class Jet {
 public:
  struct Table;

  Jet() = default;
  Jet(int dim, int order, double constant = 0.0);

  static Jet variable(int dim, int order, int axis, double value);

  int dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t size() const { return coef_.size(); }

  double constant() const { return coef_.empty() ? 0.0 : coef_[0]; }
  double coefficient(const MultiIndex& nu) const;
  void set_coefficient(const MultiIndex& nu, double v);
  // D^nu f(x0) = nu! * c_nu.
  double derivative(const MultiIndex& nu) const;

  // Monomial enumeration (ordered by total degree, then lexicographically).
  const MultiIndex& monomial(std::size_t idx) const;
  std::size_t index_of(const MultiIndex& nu) const;
  double coef(std::size_t idx) const { return coef_[idx]; }
  double& coef(std::size_t idx) { return coef_[idx]; }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);
  Jet& operator+=(double s);
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a += -s; }
  friend Jet operator-(double s, const Jet& a) { return (a * -1.0) + s; }
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator/(Jet a, double s) { return a *= (1.0 / s); }
  Jet operator-() const { return *this * -1.0; }

  // Compose with a univariate function given its scaled derivatives at the
  // constant term: series[n] = phi^{(n)}(u0) / n!.
  Jet compose(std::span<const double> series) const;

  // Partial derivative of the polynomial; result has order() - 1.
  Jet differentiate(int axis) const;

  // q(u) = p(A u) for a dim() x m matrix A; result has dimension m.
  Jet compose_linear(const Eigen::MatrixXd& a) const;

  // Truncate to a lower order.
  Jet truncated(int order) const;

  double evaluate(std::span<const double> h) const;

 private:
  int dim_ = 0;
  int order_ = 0;
  std::shared_ptr<const Table> table_;
  std::vector<double> coef_;
};

Jet sqrt(const Jet& u);
Jet exp(const Jet& u);
Jet log(const Jet& u);
Jet sin(const Jet& u);
Jet cos(const Jet& u);
Jet pow(const Jet& u, double r);
Jet square(const Jet& u);

// Jet of all partial derivatives of f at x0 up to `order`, estimated by
// tensor-product central differences with step eps^{1/(k+2)} * scale for
// derivatives of total order k, plus one Richardson extrapolation level.
Jet finite_difference_jet(const std::function<double(std::span<const double>)>& f,
                          std::span<const double> x0, int order, double scale);

// Gradient and Hessian by the same scheme (order 1 and 2 only).
Eigen::VectorXd finite_difference_gradient(const std::function<double(std::span<const double>)>& f,
                                           std::span<const double> x0, double scale);
Eigen::MatrixXd finite_difference_hessian(const std::function<double(std::span<const double>)>& f,
                                          std::span<const double> x0, double scale);

double factorial(int n);
double multi_factorial(const MultiIndex& nu);

}  // namespace latrem
