#include "latrem/convex_body.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "latrem/errors.hpp"
#include "latrem/quadrature.hpp"

namespace latrem {

namespace {

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

Eigen::Map<const Vec> as_vec(std::span<const double> x) {
  return Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size()));
}

// Spherical volume formula vol = (1/d) * int_{S^{d-1}} gauge(theta)^{-d}.
double generic_volume(const GenericBodySpec& s) {
  const int d = s.dimension;
  if (d == 2) {
    auto f = [&](double th) {
      const double u[2] = {std::cos(th), std::sin(th)};
      return std::pow(s.gauge(u), -2.0);
    };
    double v = 0.0;
    for (int q = 0; q < 8; ++q) v += integrate_adaptive(f, q * M_PI / 4, (q + 1) * M_PI / 4, 1e-13, 1e-13);
    return v / 2.0;
  }
  if (d == 3) {
    auto inner = [&](double th) {
      auto g = [&](double ph) {
        const double u[3] = {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
        return std::pow(s.gauge(u), -3.0);
      };
      double v = 0.0;
      for (int q = 0; q < 8; ++q) v += integrate_adaptive(g, q * M_PI / 4, (q + 1) * M_PI / 4, 1e-13, 1e-13);
      return v * std::sin(th);
    };
    double v = 0.0;
    for (int q = 0; q < 4; ++q) v += integrate_adaptive(inner, q * M_PI / 4, (q + 1) * M_PI / 4, 1e-12, 1e-12);
    return v / 3.0;
  }
  throw DomainError("generic body volume by quadrature is available for d = 2, 3 only");
}

// Hessian of a generic support function with a smoothness probe: two step
// sizes must agree, otherwise H is not C^2 near xi.
Mat generic_hessian_checked(const ScalarField& h, std::span<const double> xi, bool& smooth) {
  const double r = norm(xi);
  const Mat a = finite_difference_hessian(h, xi, r);
  const Mat b = finite_difference_hessian(h, xi, r / 8);
  const double scale = std::max(1.0 / r, a.cwiseAbs().maxCoeff());
  smooth = (a - b).cwiseAbs().maxCoeff() <= 1e-4 * scale && a.allFinite();
  return b;
}

}  // namespace

double unit_ball_volume(int d) { return std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0 + 1.0); }

ConvexBody ConvexBody::ellipsoid(const Mat& q) {
  if (q.rows() != q.cols() || q.rows() < 2) throw DomainError("ellipsoid matrix must be square with d >= 2");
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * q.cwiseAbs().maxCoeff())
    throw DomainError("ellipsoid matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(q);
  if (es.eigenvalues().minCoeff() <= 0.0) throw DomainError("ellipsoid matrix must be positive definite");
  ConvexBody b;
  b.dim_ = static_cast<int>(q.rows());
  b.ellipsoid_ = true;
  b.name_ = "ellipsoid";
  b.q_ = q;
  b.q_inv_ = q.inverse();
  b.q_inv_ = 0.5 * (b.q_inv_ + b.q_inv_.transpose());
  b.det_q_ = es.eigenvalues().prod();
  b.volume_ = unit_ball_volume(b.dim_) * std::sqrt(b.det_q_);
  b.circumradius_ = std::sqrt(es.eigenvalues().maxCoeff());
  b.inradius_ = std::sqrt(es.eigenvalues().minCoeff());
  return b;
}

ConvexBody ConvexBody::ball(int dimension, double radius) {
  ConvexBody b = ellipsoid(Mat::Identity(dimension, dimension) * radius * radius);
  b.name_ = "ball";
  return b;
}

ConvexBody ConvexBody::generic(GenericBodySpec spec) {
  if (spec.dimension < 2) throw DomainError("dimension must be >= 2");
  if (!spec.support || !spec.gauge) throw DomainError("generic body needs support and gauge callables");
  if (!(spec.circumradius > 0.0) || !(spec.inradius > 0.0))
    throw DomainError("generic body needs positive circumradius and inradius bounds");
  ConvexBody b;
  b.dim_ = spec.dimension;
  b.name_ = spec.name;
  b.circumradius_ = spec.circumradius;
  b.inradius_ = spec.inradius;
  b.volume_ = spec.volume ? *spec.volume : generic_volume(spec);
  b.generic_ = std::move(spec);
  return b;
}

void ConvexBody::check_direction(std::span<const double> xi) const {
  if (static_cast<int>(xi.size()) != dim_) throw DomainError("direction has wrong dimension");
  if (!(norm(xi) > 0.0)) throw DomainError("direction must be nonzero");
}

double ConvexBody::gauge(std::span<const double> x) const {
  if (ellipsoid_) {
    const auto v = as_vec(x);
    return std::sqrt(std::max(0.0, v.dot(q_inv_ * v)));
  }
  return generic_.gauge(x);
}

bool ConvexBody::contains(std::span<const double> x, double t) const {
  if (ellipsoid_) {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) {
      double row = 0.0;
      for (int j = 0; j < dim_; ++j) row += q_inv_(i, j) * x[j];
      s += x[i] * row;
    }
    return s <= t * t;
  }
  return generic_.gauge(x) <= t;
}

double ConvexBody::support(std::span<const double> xi) const {
  check_direction(xi);
  if (ellipsoid_) {
    const auto v = as_vec(xi);
    return std::sqrt(v.dot(q_ * v));
  }
  return generic_.support(xi);
}

Jet ConvexBody::support_jet_unchecked(std::span<const double> xi, int order) const {
  if (ellipsoid_) {
    const auto v = as_vec(xi);
    const Vec qx = q_ * v;
    Jet q(dim_, order, v.dot(qx));
    if (order >= 1) {
      MultiIndex nu(dim_, 0);
      for (int i = 0; i < dim_; ++i) {
        nu.assign(dim_, 0);
        nu[i] = 1;
        q.set_coefficient(nu, 2.0 * qx[i]);
      }
    }
    if (order >= 2) {
      for (int i = 0; i < dim_; ++i) {
        for (int j = i; j < dim_; ++j) {
          MultiIndex nu(dim_, 0);
          nu[i] += 1;
          nu[j] += 1;
          q.set_coefficient(nu, i == j ? q_(i, i) : 2.0 * q_(i, j));
        }
      }
    }
    return sqrt(q);
  }
  if (generic_.support_jet) {
    std::vector<Jet> vars;
    for (int i = 0; i < dim_; ++i) vars.push_back(Jet::variable(dim_, order, i, xi[i]));
    return generic_.support_jet(vars);
  }
  return finite_difference_jet(generic_.support, xi, order, norm(xi));
}

DerivativeJet ConvexBody::support_jet(std::span<const double> xi, int order) const {
  check_direction(xi);
  const double r = norm(xi);
  if (r < 0.25) throw DomainError("support_jet: |xi| < 1/4 is too close to the cone point");
  if (r > 4.0) throw DomainError("support_jet: xi must lie in the shell 1/4 <= |xi| <= 4");
  if (order < 0 || order > 6) throw DomainError("support_jet: order must be in [0, 6]");
  return support_jet_unchecked(xi, order);
}

Vec ConvexBody::boundary_point(std::span<const double> xi) const {
  check_direction(xi);
  if (ellipsoid_) {
    const auto v = as_vec(xi);
    const Vec qx = q_ * v;
    return qx / std::sqrt(v.dot(qx));
  }
  if (generic_.support_jet) {
    Jet j = support_jet_unchecked(xi, 1);
    Vec g(dim_);
    for (int i = 0; i < dim_; ++i) {
      MultiIndex nu(dim_, 0);
      nu[i] = 1;
      g[i] = j.derivative(nu);
    }
    return g;
  }
  return finite_difference_gradient(generic_.support, xi, norm(xi));
}

Mat ConvexBody::support_hessian(std::span<const double> xi) const {
  check_direction(xi);
  if (ellipsoid_) {
    const auto v = as_vec(xi);
    const Vec qx = q_ * v;
    const double h = std::sqrt(v.dot(qx));
    return q_ / h - qx * qx.transpose() / (h * h * h);
  }
  if (generic_.support_jet) {
    Jet j = support_jet_unchecked(xi, 2);
    Mat hm(dim_, dim_);
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b) {
        MultiIndex nu(dim_, 0);
        nu[a] += 1;
        nu[b] += 1;
        hm(a, b) = j.derivative(nu);
      }
    return hm;
  }
  return finite_difference_hessian(generic_.support, xi, norm(xi));
}

double ConvexBody::gauss_curvature(std::span<const double> xi) const {
  check_direction(xi);
  const double r = norm(xi);
  std::vector<double> u(xi.begin(), xi.end());
  for (double& v : u) v /= r;
  if (ellipsoid_) {
    const auto v = as_vec(u);
    const double hu = std::sqrt(v.dot(q_ * v));
    return std::pow(hu, dim_ + 1) / det_q_;
  }
  Mat hess;
  bool smooth = true;
  if (generic_.support_jet)
    hess = support_hessian(u);
  else
    hess = generic_hessian_checked(generic_.support, u, smooth);
  if (!smooth) throw HypothesisError("flat point: support function is not smooth at this normal");
  Eigen::SelfAdjointEigenSolver<Mat> es(hess);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + dim_);
  std::sort(ev.begin(), ev.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  double prod = 1.0;
  for (int i = 1; i < dim_; ++i) prod *= ev[i];
  const double k = 1.0 / prod;
  if (!std::isfinite(k) || !(k > 1e-12)) throw HypothesisError("flat point: Gaussian curvature below 1e-12");
  return k;
}

HessianSpectrum ConvexBody::hessian_spectrum_check(std::span<const double> xi) const {
  check_direction(xi);
  const double r = norm(xi);
  if (r < 0.25 || r > 4.0) throw DomainError("hessian_spectrum_check: xi must lie in 1/4 <= |xi| <= 4");
  Eigen::SelfAdjointEigenSolver<Mat> es(support_hessian(xi));
  std::vector<int> order(dim_);
  for (int i = 0; i < dim_; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::abs(es.eigenvalues()[a]) < std::abs(es.eigenvalues()[b]); });
  HessianSpectrum s;
  s.zero_eig = es.eigenvalues()[order[0]];
  s.null_vector = es.eigenvectors().col(order[0]);
  for (int i = 1; i < dim_; ++i) s.others.push_back(es.eigenvalues()[order[i]]);
  std::sort(s.others.begin(), s.others.end());
  s.c = s.others.front() * r;
  s.C = s.others.back() * r;
  return s;
}

ConvexBody registered_generic_body(const std::string& name, int dimension, double param) {
  GenericBodySpec s;
  s.dimension = dimension;
  if (name == "ball") {
    const double radius = param > 0.0 ? param : 1.0;
    s.name = "ball";
    s.support = [radius](std::span<const double> xi) { return radius * norm(xi); };
    s.gauge = [radius](std::span<const double> x) { return norm(x) / radius; };
    s.circumradius = radius;
    s.inradius = radius;
    return ConvexBody::generic(std::move(s));
  }
  if (name == "lp") {
    const double p = param;
    if (!(p > 1.0)) throw DomainError("lp body needs p > 1");
    const double pd = p / (p - 1.0);
    s.name = "lp";
    s.gauge = [p](std::span<const double> x) {
      double a = 0.0;
      for (double v : x) a += std::pow(std::abs(v), p);
      return std::pow(a, 1.0 / p);
    };
    s.support = [pd](std::span<const double> xi) {
      double a = 0.0;
      for (double v : xi) a += std::pow(std::abs(v), pd);
      return std::pow(a, 1.0 / pd);
    };
    const double e = 0.5 - 1.0 / p;
    s.circumradius = std::max(1.0, std::pow(dimension, e));
    s.inradius = std::min(1.0, std::pow(dimension, e));
    return ConvexBody::generic(std::move(s));
  }
  throw DomainError("unknown generic body '" + name + "'");
}

}  // namespace latrem
