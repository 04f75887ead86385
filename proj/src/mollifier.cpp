#include "latrem/mollifier.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "latrem/errors.hpp"
#include "latrem/quadrature.hpp"

namespace latrem {

namespace {

constexpr int kMassCells = 1024;
constexpr double kOmegaMax = 128.0;
constexpr double kOmegaStep = 0.005;
constexpr int kProjPanels = 256;
constexpr int kQuadPoints = 16;

double bump(double r) {
  if (r >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r * r));
}

double sphere_area_of(int d) { return 2.0 * std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0); }

}  // namespace

struct Mollifier::Tables {
  int dim = 0;
  double c = 0.0;
  std::vector<double> mass;  // cumulative radial mass at i / kMassCells (unnormalized)
  std::vector<double> value, slope;  // rho^ and d rho^/d omega on the omega grid
  // Projection nodes for direct evaluation beyond the table.
  std::vector<double> s_nodes, s_weights;
};

namespace {

double radial_density(int d, double r) { return bump(r) * std::pow(r, d - 1); }

// Marginal of rho along one axis, P(s) = int_{R^{d-1}} bump(sqrt(s^2 + |y|^2)) dy
// (unnormalized).
double projection(int d, double s) {
  if (s >= 1.0) return 0.0;
  if (d == 1) return bump(s);
  const double ymax = std::sqrt(1.0 - s * s);
  auto f = [&](double y) { return bump(std::sqrt(s * s + y * y)) * std::pow(y, d - 2); };
  return sphere_area_of(d - 1) * integrate_composite(f, 0.0, ymax, 8, kQuadPoints);
}

std::shared_ptr<const Mollifier::Tables> build_tables(int d) {
  auto t = std::make_shared<Mollifier::Tables>();
  t->dim = d;
  const GaussRule& g = gauss_legendre(kQuadPoints);
  t->mass.assign(kMassCells + 1, 0.0);
  for (int i = 0; i < kMassCells; ++i) {
    const double a = static_cast<double>(i) / kMassCells, b = static_cast<double>(i + 1) / kMassCells;
    double s = 0.0;
    for (int q = 0; q < kQuadPoints; ++q)
      s += 0.5 * (b - a) * g.weights[q] * radial_density(d, 0.5 * (a + b) + 0.5 * (b - a) * g.nodes[q]);
    t->mass[i + 1] = t->mass[i] + s;
  }
  t->c = 1.0 / (sphere_area_of(d) * t->mass.back());

  // rho^(omega) = 2 int_0^1 P(s) cos(2 pi omega s) ds with P the normalized marginal.
  const int n = kProjPanels * kQuadPoints;
  t->s_nodes.resize(n);
  t->s_weights.resize(n);
  std::vector<double> proj(n);
  for (int p = 0; p < kProjPanels; ++p) {
    const double a = static_cast<double>(p) / kProjPanels, w = 1.0 / kProjPanels;
    for (int q = 0; q < kQuadPoints; ++q) {
      const int k = p * kQuadPoints + q;
      t->s_nodes[k] = a + 0.5 * w * (1.0 + g.nodes[q]);
      proj[k] = t->c * projection(d, t->s_nodes[k]);
      t->s_weights[k] = 2.0 * 0.5 * w * g.weights[q] * proj[k];
    }
  }
  const int m = static_cast<int>(std::lround(kOmegaMax / kOmegaStep)) + 1;
  t->value.assign(m, 0.0);
  t->slope.assign(m, 0.0);
  // Rotate e^{2 pi i omega s} along the omega grid per node.
  std::vector<std::complex<double>> z(n, 1.0), step(n);
  for (int k = 0; k < n; ++k) step[k] = std::polar(1.0, 2.0 * M_PI * kOmegaStep * t->s_nodes[k]);
  for (int j = 0; j < m; ++j) {
    if (j % 256 == 0) {
      for (int k = 0; k < n; ++k) z[k] = std::polar(1.0, 2.0 * M_PI * (j * kOmegaStep) * t->s_nodes[k]);
    }
    CompensatedSum v, dv;
    for (int k = 0; k < n; ++k) {
      v.add(t->s_weights[k] * z[k].real());
      dv.add(-2.0 * M_PI * t->s_nodes[k] * t->s_weights[k] * z[k].imag());
      z[k] *= step[k];
    }
    t->value[j] = v.value();
    t->slope[j] = dv.value();
  }
  return t;
}

std::shared_ptr<const Mollifier::Tables> tables_for(int d) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const Mollifier::Tables>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[d];
  if (!slot) slot = build_tables(d);
  return slot;
}

}  // namespace

Mollifier::Mollifier(int dimension, double epsilon) : dim_(dimension), eps_(epsilon) {
  if (dimension < 1) throw DomainError("mollifier dimension must be positive");
  if (!(epsilon > 0.0)) throw DomainError("mollifier scale must be positive");
  tables_ = tables_for(dimension);
}

double Mollifier::normalization() const { return tables_->c; }

double Mollifier::profile(double r) const { return tables_->c * bump(r); }

double Mollifier::value(std::span<const double> u) const {
  double s = 0.0;
  for (double v : u) s += v * v;
  return profile(std::sqrt(s));
}

double Mollifier::sphere_area() const { return sphere_area_of(dim_); }

double Mollifier::radial_mass(double s) const {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return tables_->c * tables_->mass.back();
  const int i = static_cast<int>(s * kMassCells);
  const double a = static_cast<double>(i) / kMassCells;
  const GaussRule& g = gauss_legendre(kQuadPoints);
  double part = 0.0;
  for (int q = 0; q < kQuadPoints; ++q)
    part += 0.5 * (s - a) * g.weights[q] * radial_density(dim_, 0.5 * (a + s) + 0.5 * (s - a) * g.nodes[q]);
  return tables_->c * (tables_->mass[i] + part);
}

double Mollifier::fourier(double omega) const {
  omega = std::abs(omega);
  const auto& t = *tables_;
  if (omega >= kOmegaMax) {
    CompensatedSum v;
    for (std::size_t k = 0; k < t.s_nodes.size(); ++k)
      v.add(t.s_weights[k] * std::cos(2.0 * M_PI * omega * t.s_nodes[k]));
    return v.value();
  }
  const double x = omega / kOmegaStep;
  const int j = static_cast<int>(x);
  const double u = x - j, h = kOmegaStep;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  return h00 * t.value[j] + h10 * h * t.slope[j] + h01 * t.value[j + 1] + h11 * h * t.slope[j + 1];
}

double Mollifier::fourier_table_limit() const { return kOmegaMax; }

double Mollifier::fourier_direct(double omega) const {
  omega = std::abs(omega);
  const double nu = dim_ / 2.0 - 1.0;
  const double c = tables_->c;
  if (omega < 1e-12) return 1.0;
  auto f = [&](double r) {
    const double bessel = std::cyl_bessel_j(nu, 2.0 * M_PI * omega * r);
    return c * bump(r) * bessel * std::pow(r, dim_ / 2.0);
  };
  const int panels = 16 + static_cast<int>(4 * omega);
  return 2.0 * M_PI * std::pow(omega, -nu) * integrate_composite(f, 0.0, 1.0, panels, kQuadPoints);
}

}  // namespace latrem
