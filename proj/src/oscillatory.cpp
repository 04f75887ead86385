#include "latrem/oscillatory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "latrem/errors.hpp"
#include "latrem/geometry_lemmas.hpp"

namespace latrem {

namespace {

constexpr int kPoints = 16;
constexpr double kMaxEvaluations = 2e8;

std::span<const double> span_of(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

struct AxisRule {
  std::vector<double> x, w;
};

AxisRule axis_rule(double a, double b, int panels) {
  const GaussRule& g = gauss_legendre(kPoints);
  AxisRule r;
  r.x.reserve(panels * kPoints);
  r.w.reserve(panels * kPoints);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int q = 0; q < kPoints; ++q) {
      r.x.push_back(lo + 0.5 * h * (1.0 + g.nodes[q]));
      r.w.push_back(0.5 * h * g.weights[q]);
    }
  }
  return r;
}

Complex tensor_sum(const OscIntegrand& ig, int panels) {
  const int d = ig.dimension;
  std::vector<AxisRule> rules;
  for (int i = 0; i < d; ++i) rules.push_back(axis_rule(ig.box[i].first, ig.box[i].second, panels));
  const std::size_t n = rules[0].x.size();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  CompensatedComplexSum s;
  while (true) {
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      x[i] = rules[i].x[idx[i]];
      w *= rules[i].w[idx[i]];
    }
    const double amp = ig.amplitude(x);
    if (amp != 0.0) s.add(w * amp * std::polar(1.0, ig.lambda * ig.phase(x)));
    int a = 0;
    while (a < d && ++idx[a] == n) idx[a++] = 0;
    if (a == d) break;
  }
  return s.value();
}

Complex axis_sum(const std::function<double(double)>& w, const std::function<double(double)>& f, double lambda,
                 double a, double b, int panels) {
  const AxisRule r = axis_rule(a, b, panels);
  CompensatedComplexSum s;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    const double amp = w(r.x[i]);
    if (amp != 0.0) s.add(r.w[i] * amp * std::polar(1.0, lambda * f(r.x[i])));
  }
  return s.value();
}

template <class Level>
Complex refine(Level level, int start, double tol, double cost_per_level_base, int d) {
  Complex prev = level(start);
  for (int panels = 2 * start;; panels *= 2) {
    if (std::pow(static_cast<double>(panels) * kPoints, d) * cost_per_level_base > kMaxEvaluations)
      throw NumericError("integrate_direct: no convergence within the evaluation budget");
    const Complex cur = level(panels);
    if (std::abs(cur - prev) <= tol) return cur;
    prev = cur;
  }
}

Vec gradient_of(const OscIntegrand& ig, std::span<const double> x) {
  if (ig.gradient) return ig.gradient(x);
  return finite_difference_gradient(ig.phase, x, 1.0);
}

Mat hessian_of(const OscIntegrand& ig, std::span<const double> x) {
  if (ig.hessian) return ig.hessian(x);
  return finite_difference_hessian(ig.phase, x, 1.0);
}

Jet jet_of(const ScalarField& f, const JetField& fj, const Vec& x0, int order) {
  const int d = static_cast<int>(x0.size());
  if (fj) {
    std::vector<Jet> vars;
    for (int i = 0; i < d; ++i) vars.push_back(Jet::variable(d, order, i, x0(i)));
    return fj(vars);
  }
  return finite_difference_jet(f, span_of(x0), order, 1.0);
}

Jet raised(const Jet& j, int order, int min_degree) {
  Jet out(j.dim(), order);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const MultiIndex& nu = j.monomial(i);
    int deg = 0;
    for (int v : nu) deg += v;
    if (deg >= min_degree) out.set_coefficient(nu, j.coef(i));
  }
  return out;
}

// P u = sum_{jk} (A^{-1})_{jk} d_j d_k u.
Jet apply_p(const Jet& u, const Mat& a_inv) {
  const int d = u.dim();
  Jet out(d, std::max(u.order() - 2, 0));
  for (int j = 0; j < d; ++j) {
    const Jet dj = u.differentiate(j);
    for (int k = 0; k < d; ++k) out += dj.differentiate(k) * a_inv(j, k);
  }
  return out;
}

}  // namespace

Complex integrate_direct(const OscIntegrand& ig, double tol) {
  const int d = ig.dimension;
  if (d < 1 || d > 3) throw DomainError("integrate_direct supports 1 <= d <= 3");
  if (!(ig.lambda >= 0.0) || ig.lambda > 1e5) throw DomainError("integrate_direct requires 0 <= lambda <= 1e5");
  if (static_cast<int>(ig.box.size()) != d) throw DomainError("integrate_direct: box has wrong dimension");
  const int start = std::max(4, static_cast<int>(std::ceil(std::sqrt(ig.lambda))));
  if (ig.separable()) {
    if (static_cast<int>(ig.amplitude_factors.size()) != d || static_cast<int>(ig.phase_terms.size()) != d)
      throw DomainError("integrate_direct: separable parts have wrong dimension");
    Complex prod = 1.0;
    for (int i = 0; i < d; ++i) {
      auto level = [&](int panels) {
        return axis_sum(ig.amplitude_factors[i], ig.phase_terms[i], ig.lambda, ig.box[i].first, ig.box[i].second,
                        panels);
      };
      prod *= refine(level, start, tol / d, 1.0, 1);
    }
    return prod;
  }
  auto level = [&](int panels) { return tensor_sum(ig, panels); };
  return refine(level, start, tol, 1.0, d);
}

std::vector<CriticalPoint> find_critical_points(const OscIntegrand& ig,
                                                const std::vector<std::pair<double, double>>& search_box,
                                                int starts_per_axis) {
  const int d = ig.dimension;
  if (static_cast<int>(search_box.size()) != d) throw DomainError("find_critical_points: box has wrong dimension");
  if (starts_per_axis < 2) throw DomainError("find_critical_points needs at least 2 starts per axis");
  double spacing = INFINITY;
  for (auto [a, b] : search_box) spacing = std::min(spacing, (b - a) / starts_per_axis);
  auto inside = [&](const Vec& x) {
    for (int i = 0; i < d; ++i)
      if (x(i) < search_box[i].first || x(i) > search_box[i].second) return false;
    return true;
  };

  std::vector<CriticalPoint> found;
  std::vector<int> idx(d, 0);
  while (true) {
    Vec x(d);
    for (int i = 0; i < d; ++i) {
      const auto [a, b] = search_box[i];
      x(i) = a + (idx[i] + 0.5) * (b - a) / starts_per_axis;
    }
    // Damped Newton: steps capped at the start spacing, halved while |grad f| grows.
    bool converged = false;
    Vec g = gradient_of(ig, span_of(x));
    for (int it = 0; it < 100 && inside(x); ++it) {
      if (g.norm() <= 1e-10) {
        converged = true;
        break;
      }
      const Mat h = hessian_of(ig, span_of(x));
      Eigen::FullPivLU<Mat> lu(h);
      Vec step = lu.isInvertible() ? Vec(-lu.solve(g)) : Vec(-g);
      if (step.norm() > spacing) step *= spacing / step.norm();
      Vec xn = x + step;
      Vec gn = gradient_of(ig, span_of(xn));
      for (int half = 0; half < 12 && gn.norm() > g.norm(); ++half) {
        step *= 0.5;
        xn = x + step;
        gn = gradient_of(ig, span_of(xn));
      }
      x = xn;
      g = gn;
    }
    if (converged && inside(x)) {
      const Mat h = hessian_of(ig, span_of(x));
      const double det = h.determinant();
      const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
      if (std::abs(det) < 1e-10 * std::pow(scale, d)) throw HypothesisError("degenerate critical point: singular Hessian");
      const double C = 2.0 * std::max({1.0, h.cwiseAbs().maxCoeff(), g.cwiseAbs().maxCoeff()});
      const double r1 = inverse_fn_radii(std::abs(det), C, d, spacing).r1;
      bool merged = false;
      for (auto& cp : found) {
        if ((cp.x0 - x).norm() < r1) {
          ++cp.hits;
          merged = true;
          break;
        }
      }
      if (!merged) {
        CriticalPoint cp;
        cp.x0 = x;
        cp.hessian = 0.5 * (h + h.transpose());
        cp.det_abs = std::abs(det);
        Eigen::SelfAdjointEigenSolver<Mat> es(cp.hessian);
        for (int i = 0; i < d; ++i) cp.signature += es.eigenvalues()(i) > 0 ? 1 : -1;
        cp.hits = 1;
        found.push_back(cp);
      }
    }
    int a = 0;
    while (a < d && ++idx[a] == starts_per_axis) idx[a++] = 0;
    if (a == d) break;
  }
  std::vector<CriticalPoint> out;
  for (auto& cp : found)
    if (cp.hits >= 2) out.push_back(cp);
  std::sort(out.begin(), out.end(), [](const CriticalPoint& p, const CriticalPoint& q) {
    return std::lexicographical_compare(p.x0.data(), p.x0.data() + p.x0.size(), q.x0.data(), q.x0.data() + q.x0.size());
  });
  return out;
}

Complex stationary_leading_term(const OscIntegrand& ig, const CriticalPoint& cp, bool with_correction) {
  const int d = ig.dimension;
  const double lam = ig.lambda;
  const double w0 = ig.amplitude(span_of(cp.x0));
  const double f0 = ig.phase(span_of(cp.x0));
  const Complex factor = std::pow(2.0 * M_PI, d / 2.0) / std::sqrt(cp.det_abs) *
                         std::polar(1.0, M_PI / 4.0 * cp.signature + lam * f0);
  Complex result = std::pow(lam, -d / 2.0) * factor * w0;
  if (!with_correction) return result;

  // L_1 u = -i [ -P u / 2 + P^2 (g u) / 8 - P^3 (g^2 u) / 96 ] at x0, with
  // P = <A^{-1} d, d> and g the phase minus its second-order Taylor part.
  const Mat a_inv = cp.hessian.inverse();
  const Jet u = raised(jet_of(ig.amplitude, ig.amplitude_jet, cp.x0, 2), 6, 0);
  const Jet g = raised(jet_of(ig.phase, ig.phase_jet, cp.x0, 4), 6, 3);
  const double pu = apply_p(u, a_inv).constant();
  const double p2 = apply_p(apply_p(g * u, a_inv), a_inv).constant();
  const double p3 = apply_p(apply_p(apply_p(g * g * u, a_inv), a_inv), a_inv).constant();
  const Complex l1 = Complex(0.0, -1.0) * (-0.5 * pu + p2 / 8.0 - p3 / 96.0);
  result += std::pow(lam, -d / 2.0 - 1.0) * factor * l1;
  return result;
}

DecayFit decay_slope(const std::function<OscIntegrand(double)>& family, std::span<const double> lambdas,
                     DecayMode mode, double tol) {
  if (lambdas.size() < 3) throw DomainError("decay_slope needs at least 3 lambda values");
  const auto [mn, mx] = std::minmax_element(lambdas.begin(), lambdas.end());
  if (!(*mn > 0.0) || *mx / *mn < 100.0 * (1.0 - 1e-12)) throw DomainError("decay_slope: lambda grid must span 2 decades");
  DecayFit fit;
  for (double lam : lambdas) {
    const OscIntegrand ig = family(lam);
    const Complex value = integrate_direct(ig, tol);
    double err = std::abs(value);
    if (mode == DecayMode::stationary) {
      Complex pred = 0.0;
      for (const auto& cp : find_critical_points(ig, ig.box)) pred += stationary_leading_term(ig, cp);
      err = std::abs(value - pred);
    }
    fit.lambdas.push_back(lam);
    fit.errors.push_back(err);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(fit.lambdas.size());
  for (std::size_t i = 0; i < fit.lambdas.size(); ++i) {
    if (!(fit.errors[i] > 0.0) || !std::isfinite(fit.errors[i])) throw NumericError("decay_slope: degenerate fit");
    const double x = std::log(fit.lambdas[i]), y = std::log(fit.errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (!std::isfinite(fit.slope)) throw NumericError("decay_slope: degenerate fit");
  return fit;
}

double chi_hat_ball(int d, double rho) {
  if (d < 1) throw DomainError("chi_hat_ball requires d >= 1");
  rho = std::abs(rho);
  if (rho < 1e-8) return unit_ball_volume(d);
  return std::cyl_bessel_j(d / 2.0, 2.0 * M_PI * rho) / std::pow(rho, d / 2.0);
}

double chi_hat_ball_oracle(int d, double rho) {
  if (d < 1) throw DomainError("chi_hat_ball_oracle requires d >= 1");
  rho = std::abs(rho);
  if (rho < 1e-8) return unit_ball_volume(d);
  const double nu = d / 2.0 - 1.0;
  auto f = [&](double r) { return std::cyl_bessel_j(nu, 2.0 * M_PI * rho * r) * std::pow(r, d / 2.0); };
  const int panels = 8 + static_cast<int>(4.0 * rho);
  return 2.0 * M_PI * std::pow(rho, -nu) * integrate_composite(f, 0.0, 1.0, panels, kPoints);
}

double chi_hat_ellipsoid(const ConvexBody& body, std::span<const double> xi) {
  if (!body.is_ellipsoid()) throw DomainError("chi_hat_ellipsoid requires an ellipsoid");
  const Vec v = Eigen::Map<const Vec>(xi.data(), static_cast<Eigen::Index>(xi.size()));
  const double rho = std::sqrt(std::max(0.0, v.dot(body.q_matrix() * v)));
  return std::sqrt(body.q_matrix().determinant()) * chi_hat_ball(body.dimension(), rho);
}

ChiHatConstants chi_hat_constants(int d) {
  static std::mutex mu;
  static std::map<int, ChiHatConstants> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(d);
  if (it != cache.end()) return it->second;
  // Least squares against the ball with rho^{-1}, rho^{-2} correction columns.
  const int n = 1201;
  Eigen::MatrixXcd a(n, 6);
  Eigen::VectorXcd b(n);
  for (int j = 0; j < n; ++j) {
    const double rho = 20.0 + 0.05 * j;
    const Complex e = unit_phase(rho);
    const double s = std::pow(rho, -(d + 1) / 2.0);
    a(j, 0) = e * s;
    a(j, 1) = std::conj(e) * s;
    a(j, 2) = e * s / rho;
    a(j, 3) = std::conj(e) * s / rho;
    a(j, 4) = e * s / (rho * rho);
    a(j, 5) = std::conj(e) * s / (rho * rho);
    b(j) = chi_hat_ball(d, rho);
  }
  const Eigen::VectorXcd c = a.colPivHouseholderQr().solve(b);
  ChiHatConstants k{c(0), c(1)};
  cache[d] = k;
  return k;
}

ChiHatModel chi_hat_expansion(const ConvexBody& body, std::span<const double> xi) {
  const int d = body.dimension();
  if (static_cast<int>(xi.size()) != d) throw DomainError("chi_hat_expansion: direction has wrong dimension");
  double r = 0.0;
  for (double v : xi) r += v * v;
  r = std::sqrt(r);
  if (r < 2.0) throw DomainError("chi_hat_expansion requires |xi| >= 2");
  std::vector<double> neg(xi.begin(), xi.end());
  for (double& v : neg) v = -v;
  const ChiHatConstants k = chi_hat_constants(d);
  const double kp = body.gauss_curvature(xi), km = body.gauss_curvature(neg);
  const double s = std::pow(r, -(d + 1) / 2.0);
  ChiHatModel m;
  m.leading = k.C / std::sqrt(kp) * unit_phase(body.support(xi)) * s;
  m.with_conjugate = m.leading + k.C_prime / std::sqrt(km) * std::conj(unit_phase(body.support(neg))) * s;
  return m;
}

}  // namespace latrem
