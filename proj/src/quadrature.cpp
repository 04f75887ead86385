#include "latrem/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "latrem/errors.hpp"

namespace latrem {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

namespace {

GaussRule compute_rule(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

// Kronrod 15-point nodes/weights and embedded Gauss 7-point weights.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

void gk15(const std::function<double(double)>& f, double a, double b, double& result, double& err) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double rk = fc * kWgk[7], rg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[j];
    const double f1 = f(c - x), f2 = f(c + x);
    rk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) rg += kWg[j / 2] * (f1 + f2);
  }
  result = rk * h;
  err = std::abs((rk - rg) * h);
}

double adaptive_rec(const std::function<double(double)>& f, double a, double b, double whole, double err,
                    double tol, int depth, bool& ok) {
  if (err <= tol || b - a < 1e-15 * (1.0 + std::abs(a))) {
    if (err > tol) ok = false;
    return whole;
  }
  if (depth <= 0) {
    ok = false;
    return whole;
  }
  const double m = 0.5 * (a + b);
  double l, el, r, er;
  gk15(f, a, m, l, el);
  gk15(f, m, b, r, er);
  return adaptive_rec(f, a, m, l, el, 0.5 * tol, depth - 1, ok) +
         adaptive_rec(f, m, b, r, er, 0.5 * tol, depth - 1, ok);
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(compute_rule(n));
  return *slot;
}

double integrate_composite(const std::function<double(double)>& f, double a, double b, int panels, int points) {
  const GaussRule& g = gauss_legendre(points);
  const double w = (b - a) / panels;
  CompensatedSum s;
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * w;
    for (int i = 0; i < points; ++i) s.add(0.5 * w * g.weights[i] * f(c + 0.5 * w * g.nodes[i]));
  }
  return s.value();
}

Complex integrate_composite_complex(const std::function<Complex(double)>& f, double a, double b, int panels, int points) {
  const GaussRule& g = gauss_legendre(points);
  const double w = (b - a) / panels;
  CompensatedComplexSum s;
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * w;
    for (int i = 0; i < points; ++i) s.add(0.5 * w * g.weights[i] * f(c + 0.5 * w * g.nodes[i]));
  }
  return s.value();
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                          double rel_tol, int max_depth) {
  if (a == b) return 0.0;
  double whole, err;
  gk15(f, a, b, whole, err);
  const double tol = std::max(abs_tol, rel_tol * std::abs(whole));
  bool ok = true;
  const double r = adaptive_rec(f, a, b, whole, err, tol, max_depth, ok);
  if (!ok) throw NumericError("adaptive quadrature did not reach tolerance");
  return r;
}

Complex unit_phase(double x) {
  const double r = x - std::nearbyint(x);
  const double ang = -2.0 * M_PI * r;
  return {std::cos(ang), std::sin(ang)};
}

}  // namespace latrem
