#include "latrem/exp_sum.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "latrem/errors.hpp"

namespace latrem {

namespace {

constexpr double kTermBudget = 1e8;

std::span<const double> span_of(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

struct Term {
  IVec m;
  Complex a;
};

// Lattice points m with m / (delta M) in supp G, in lexicographic order
// (last coordinate fastest), each with the summand G e(T F).
template <class Visit>
void enumerate_support(const SumSpec& spec, const PhasePair& pp, Visit visit) {
  const int d = pp.dimension;
  const double D = spec.delta * spec.M;
  const auto box = pp.omega.bounding_box(pp.margin);
  std::vector<std::int64_t> lo(d), hi(d);
  double count = 1.0;
  for (int i = 0; i < d; ++i) {
    lo[i] = static_cast<std::int64_t>(std::ceil(box[i].first * D));
    hi[i] = static_cast<std::int64_t>(std::floor(box[i].second * D));
    if (hi[i] < lo[i]) return;
    count *= static_cast<double>(hi[i] - lo[i] + 1);
  }
  if (count > kTermBudget) throw ResourceError("exponential sum exceeds the 1e8-term budget");
  IVec m(d);
  for (int i = 0; i < d; ++i) m(i) = lo[i];
  std::vector<double> x(d);
  while (true) {
    for (int i = 0; i < d; ++i) x[i] = static_cast<double>(m(i)) / D;
    if (pp.omega.contains(x, pp.margin)) {
      const double g = pp.G(x);
      if (g != 0.0) visit(m, x, g);
    }
    int a = d - 1;
    while (a >= 0 && m(a) == hi[a]) {
      m(a) = lo[a];
      --a;
    }
    if (a < 0) break;
    ++m(a);
  }
}

std::vector<Term> collect_terms(const SumSpec& spec, const PhasePair& pp) {
  std::vector<Term> terms;
  enumerate_support(spec, pp, [&](const IVec& m, const std::vector<double>& x, double g) {
    terms.push_back({m, g * unit_phase(spec.T * pp.F(x))});
  });
  return terms;
}

Vec phase_gradient(const PhasePair& pp, std::span<const double> x) {
  if (pp.F_gradient) return pp.F_gradient(x);
  return finite_difference_gradient(pp.F, x, 1.0);
}

Mat phase_hessian(const PhasePair& pp, std::span<const double> x) {
  if (pp.F_hessian) return pp.F_hessian(x);
  return finite_difference_hessian(pp.F, x, 1.0);
}

// Grid points of the support region (cell centers of a grid^d box).
std::vector<Vec> support_grid(const PhasePair& pp, int grid) {
  const int d = pp.dimension;
  const auto box = pp.omega.bounding_box(pp.margin);
  std::vector<Vec> pts;
  std::vector<int> idx(d, 0);
  while (true) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x(i) = box[i].first + (idx[i] + 0.5) * (box[i].second - box[i].first) / grid;
    if (pp.omega.contains(span_of(x), pp.margin)) pts.push_back(x);
    int a = 0;
    while (a < d && ++idx[a] == grid) idx[a++] = 0;
    if (a == d) break;
  }
  return pts;
}

}  // namespace

void SumSpec::validate() const {
  if (!(M > 1.0)) throw ParameterError("SumSpec requires M > 1");
  if (!(delta > 0.0)) throw ParameterError("SumSpec requires delta > 0");
  if (delta != 1.0 && !(M > std::max(1.0, 1.0 / delta))) throw ParameterError("SumSpec requires M > max(1, 1/delta)");
  if (!(T >= 0.0) || !std::isfinite(T)) throw ParameterError("SumSpec requires finite T >= 0");
}

namespace {

Vec image(const BallRegion& r, std::size_t i, std::span<const double> x) {
  const Vec v = Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size()));
  return r.maps.empty() ? v : Vec(r.maps[i] * v);
}

double map_norm(const BallRegion& r, std::size_t i) {
  if (r.maps.empty()) return 1.0;
  Eigen::JacobiSVD<Mat> svd(r.maps[i]);
  return svd.singularValues()(0);
}

}  // namespace

bool BallRegion::contains(std::span<const double> x, double shrink) const {
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double s = (image(*this, i, x) - centers[i]).squaredNorm();
    const double r = radii[i] - shrink * (shrink == 0.0 ? 0.0 : map_norm(*this, i));
    if (r < 0.0 || s > r * r) return false;
  }
  return true;
}

double BallRegion::depth(std::span<const double> x) const {
  double best = INFINITY;
  for (std::size_t i = 0; i < centers.size(); ++i)
    best = std::min(best, (radii[i] - (image(*this, i, x) - centers[i]).norm()) / map_norm(*this, i));
  return best;
}

std::vector<std::pair<double, double>> BallRegion::bounding_box(double shrink) const {
  if (centers.empty()) throw DomainError("BallRegion has no balls");
  const int d = static_cast<int>(centers[0].size());
  std::vector<std::pair<double, double>> box(d, {-INFINITY, INFINITY});
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double r = std::max(0.0, radii[i] - shrink * map_norm(*this, i));
    // {x : |A x - c| <= r} = A^{-1}(c + r B); half-widths r |row_k(A^{-1})|.
    const Mat inv = maps.empty() ? Mat(Mat::Identity(d, d)) : Mat(maps[i].inverse());
    const Vec mid = inv * centers[i];
    for (int k = 0; k < d; ++k) {
      const double w = r * inv.row(k).norm();
      box[k].first = std::max(box[k].first, mid(k) - w);
      box[k].second = std::min(box[k].second, mid(k) + w);
    }
  }
  return box;
}

BallRegion BallRegion::translated(const Vec& s) const {
  // {x : |A (x - s) - c| <= R} has center c + A s.
  BallRegion out = *this;
  for (std::size_t i = 0; i < out.centers.size(); ++i) out.centers[i] += maps.empty() ? s : Vec(maps[i] * s);
  return out;
}

void PhasePair::validate() const {
  if (dimension < 1) throw DomainError("PhasePair dimension must be positive");
  if (!G || !F) throw DomainError("PhasePair requires G and F");
  if (omega.centers.empty() || omega.centers.size() != omega.radii.size() ||
      (!omega.maps.empty() && omega.maps.size() != omega.centers.size()))
    throw DomainError("PhasePair domain must be a nonempty intersection of balls");
  for (const auto& c : omega.centers)
    if (c.size() != dimension) throw DomainError("PhasePair domain center has wrong dimension");
  if (!(margin > 0.0)) throw DomainError("PhasePair requires a positive support margin");
}

Complex eval_sum(const SumSpec& spec, const PhasePair& pp) {
  spec.validate();
  pp.validate();
  CompensatedComplexSum s;
  enumerate_support(spec, pp, [&](const IVec&, const std::vector<double>& x, double g) {
    s.add(g * unit_phase(spec.T * pp.F(x)));
  });
  return s.value();
}

WeylIdentity weyl_difference_identity(const SumSpec& spec, const PhasePair& pp, const IVec& r) {
  spec.validate();
  pp.validate();
  if (r.size() != pp.dimension || r.isZero()) throw DomainError("weyl_difference_identity requires nonzero r in Z^d");
  const std::vector<Term> terms = collect_terms(spec, pp);
  WeylIdentity out;
  CompensatedComplexSum s;
  for (const auto& t : terms) s.add(t.a);
  out.lhs = std::norm(s.value());

  // Pair sum grouped by the difference h = m' - m, in lexicographic h order.
  std::map<std::vector<std::int64_t>, CompensatedComplexSum> by_h;
  for (const auto& t : terms)
    for (const auto& u : terms) {
      const IVec h = u.m - t.m;
      by_h[std::vector<std::int64_t>(h.data(), h.data() + h.size())].add(t.a * std::conj(u.a));
    }
  CompensatedSum rhs;
  for (const auto& [h, v] : by_h) rhs.add(v.value().real());
  out.rhs = rhs.value();

  // Lines m0 + Z r, keyed by the representative with coordinate a in [0, |r_a|).
  int a = 0;
  while (r(a) == 0) ++a;
  auto line_key = [&](const IVec& m) {
    // Quotient chosen so that the remainder lies in [0, |r_a|).
    const std::int64_t ra = r(a);
    std::int64_t k = m(a) / ra;
    const std::int64_t rem = m(a) - k * ra;
    if (rem < 0) {
      if (ra > 0)
        --k;
      else
        ++k;
    }
    const IVec rep = m - k * r;
    return std::make_pair(std::vector<std::int64_t>(rep.data(), rep.data() + rep.size()), k);
  };
  std::map<std::vector<std::int64_t>, std::vector<std::pair<std::int64_t, Complex>>> lines;
  for (const auto& t : terms) {
    auto [key, k] = line_key(t.m);
    lines[key].emplace_back(k, t.a);
  }
  CompensatedSum line_lhs;
  std::map<std::int64_t, CompensatedComplexSum> by_step;
  for (const auto& [key, pts] : lines) {
    CompensatedComplexSum sl;
    for (const auto& [k, v] : pts) sl.add(v);
    line_lhs.add(std::norm(sl.value()));
    for (const auto& [k1, v1] : pts)
      for (const auto& [k2, v2] : pts) by_step[k2 - k1].add(v1 * std::conj(v2));
  }
  out.line_lhs = line_lhs.value();
  CompensatedSum line_rhs;
  for (const auto& [h, v] : by_step) line_rhs.add(v.value().real());
  out.line_rhs = line_rhs.value();
  return out;
}

TransformedSum a_process(const SumSpec& spec, const PhasePair& pp, int q, const std::vector<IVec>& shifts, double H) {
  spec.validate();
  pp.validate();
  if (q < 1) throw ParameterError("a_process requires q >= 1");
  if (!(H > 1.0) || H > spec.M) throw ParameterError("a_process requires 1 < H <= M");
  if (static_cast<int>(shifts.size()) != q) throw ParameterError("a_process requires q shift vectors");
  for (const auto& r : shifts)
    if (r.size() != pp.dimension || r.isZero()) throw ParameterError("a_process shifts must be nonzero vectors in Z^d");
  TransformedSum ts;
  ts.q = q;
  ts.shifts = shifts;
  ts.H = H;
  ts.spec = spec;
  ts.base = pp;
  for (int l = 1; l <= q; ++l) ts.H_l.push_back(std::pow(H, std::pow(2.0, l - q)));
  std::vector<std::int64_t> hmax(q);
  for (int l = 0; l < q; ++l) hmax[l] = static_cast<std::int64_t>(std::ceil(ts.H_l[l])) - 1;
  std::vector<std::int64_t> h(q, 1);
  for (int l = 0; l < q; ++l)
    if (hmax[l] < 1) return ts;
  while (true) {
    ts.tuples.push_back(h);
    int l = q - 1;
    while (l >= 0 && h[l] == hmax[l]) {
      h[l] = 1;
      --l;
    }
    if (l < 0) break;
    ++h[l];
  }
  return ts;
}

double TransformedSum::T_of(const std::vector<std::int64_t>& h) const {
  double sh = 1.0;
  for (auto v : h) sh *= static_cast<double>(v);
  return sh * spec.T / std::pow(spec.delta * spec.M, q);
}

DifferencedPair TransformedSum::differenced(const std::vector<std::int64_t>& h) const {
  if (static_cast<int>(h.size()) != q) throw ParameterError("tuple length differs from q");
  const int d = base.dimension;
  const double D = spec.delta * spec.M;
  DifferencedPair out;
  out.h = h;
  for (auto v : h) out.script_h *= static_cast<double>(v);
  // Vertex shifts s_u = sum_l u_l h_l r_l / D and signs (-1)^{q-|u|}.
  std::vector<Vec> s;
  std::vector<double> sign;
  for (int u = 0; u < (1 << q); ++u) {
    Vec v = Vec::Zero(d);
    int bits = 0;
    for (int l = 0; l < q; ++l)
      if (u & (1 << l)) {
        v += static_cast<double>(h[l]) * shifts[l].cast<double>() / D;
        ++bits;
      }
    s.push_back(v);
    sign.push_back((q - bits) % 2 == 0 ? 1.0 : -1.0);
  }
  const double scale = std::pow(D, q) / out.script_h;
  const PhasePair b = base;
  PhasePair& p = out.pair;
  p.dimension = d;
  p.margin = b.margin;
  for (const Vec& v : s) {
    BallRegion shifted = b.omega.translated(-v);
    p.omega.centers.insert(p.omega.centers.end(), shifted.centers.begin(), shifted.centers.end());
    p.omega.radii.insert(p.omega.radii.end(), shifted.radii.begin(), shifted.radii.end());
    p.omega.maps.insert(p.omega.maps.end(), shifted.maps.begin(), shifted.maps.end());
  }
  p.G = [b, s](std::span<const double> x) {
    std::vector<double> y(x.size());
    double g = 1.0;
    for (const Vec& v : s) {
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + v(i);
      g *= b.G(y);
      if (g == 0.0) return 0.0;
    }
    return g;
  };
  p.F = [b, s, sign, scale](std::span<const double> x) {
    std::vector<double> y(x.size());
    CompensatedSum f;
    for (std::size_t u = 0; u < s.size(); ++u) {
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + s[u](i);
      f.add(sign[u] * b.F(y));
    }
    return scale * f.value();
  };
  if (b.F_gradient) {
    p.F_gradient = [b, s, sign, scale](std::span<const double> x) {
      std::vector<double> y(x.size());
      Vec g = Vec::Zero(static_cast<Eigen::Index>(x.size()));
      for (std::size_t u = 0; u < s.size(); ++u) {
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + s[u](i);
        g += sign[u] * b.F_gradient(y);
      }
      return Vec(scale * g);
    };
  }
  if (b.F_hessian) {
    p.F_hessian = [b, s, sign, scale](std::span<const double> x) {
      std::vector<double> y(x.size());
      const auto n = static_cast<Eigen::Index>(x.size());
      Mat hm = Mat::Zero(n, n);
      for (std::size_t u = 0; u < s.size(); ++u) {
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + s[u](i);
        hm += sign[u] * b.F_hessian(y);
      }
      return Mat(scale * hm);
    };
  }
  return out;
}

double fq_integral_form(const TransformedSum& ts, const std::vector<std::int64_t>& h,
                        const std::function<double(std::span<const double>)>& directional_derivative,
                        std::span<const double> x, int points) {
  const int q = ts.q;
  const int d = ts.base.dimension;
  const double D = ts.spec.delta * ts.spec.M;
  const GaussRule& g = gauss_legendre(points);
  std::vector<int> idx(q, 0);
  std::vector<double> y(d);
  CompensatedSum s;
  while (true) {
    double w = 1.0;
    for (int i = 0; i < d; ++i) y[i] = x[i];
    for (int l = 0; l < q; ++l) {
      const double t = 0.5 * (1.0 + g.nodes[idx[l]]);
      w *= 0.5 * g.weights[idx[l]];
      for (int i = 0; i < d; ++i) y[i] += t * static_cast<double>(h[l] * ts.shifts[l](i)) / D;
    }
    s.add(w * directional_derivative(y));
    int a = 0;
    while (a < q && ++idx[a] == points) idx[a++] = 0;
    if (a == q) break;
  }
  return s.value();
}

WeylInequality verify_weyl_inequality(const SumSpec& spec, const PhasePair& pp, int q, const std::vector<IVec>& shifts,
                                      double H) {
  const TransformedSum ts = a_process(spec, pp, q, shifts, H);
  const int d = pp.dimension;
  const double D = spec.delta * spec.M;
  const double Q = std::pow(2.0, q);
  WeylInequality out;
  out.lhs = std::pow(std::abs(eval_sum(spec, pp)), Q);
  double hprod = 1.0;
  for (double v : ts.H_l) hprod *= v;
  CompensatedSum inner;
  for (const auto& h : ts.tuples) {
    SumSpec sub = spec;
    sub.T = ts.T_of(h);
    inner.add(std::abs(eval_sum(sub, ts.differenced(h).pair)));
  }
  out.rhs = std::pow(D, Q * d) / H + std::pow(D, (Q - 1) * d) / hprod * inner.value();
  out.ratio = out.lhs / out.rhs;
  return out;
}

double phase_gradient_bound(const PhasePair& pp, int grid) {
  pp.validate();
  double best = 0.0;
  for (const Vec& x : support_grid(pp, grid)) best = std::max(best, phase_gradient(pp, span_of(x)).norm());
  return 2.0 * best;
}

Complex poisson_dual(const SumSpec& spec, const PhasePair& pp, double p_radius, double tol) {
  spec.validate();
  pp.validate();
  if (!(p_radius >= 0.0)) throw DomainError("poisson_dual requires p_radius >= 0");
  const int d = pp.dimension;
  const double D = spec.delta * spec.M;
  const auto box = pp.omega.bounding_box(pp.margin);
  const std::int64_t pr = static_cast<std::int64_t>(std::floor(p_radius));
  CompensatedComplexSum total;
  IVec p = IVec::Constant(d, -pr);
  while (true) {
    const double pn = p.cast<double>().norm();
    if (pn <= p_radius) {
      const Vec pv = p.cast<double>();
      const double s = std::max(1.0, spec.T + D * pn);
      OscIntegrand ig;
      ig.dimension = d;
      ig.lambda = 2.0 * M_PI * s;
      ig.box = box;
      ig.amplitude = [&pp](std::span<const double> x) { return pp.omega.contains(x, pp.margin) ? pp.G(x) : 0.0; };
      ig.phase = [&, pv, s](std::span<const double> x) {
        double xp = 0.0;
        for (int i = 0; i < d; ++i) xp += x[i] * pv(i);
        return -(spec.T * pp.F(x) - D * xp) / s;
      };
      try {
        total.add(std::pow(D, d) * integrate_direct(ig, tol));
      } catch (const DomainError& e) {
        throw NumericError(std::string("poisson_dual: ") + e.what());
      }
    }
    int a = d - 1;
    while (a >= 0 && p(a) == pr) {
      p(a) = -pr;
      --a;
    }
    if (a < 0) break;
    ++p(a);
  }
  return total.value();
}

double b_process_ratio(const SumSpec& spec, const PhasePair& pp, int grid) {
  spec.validate();
  pp.validate();
  const int d = pp.dimension;
  for (const Vec& x : support_grid(pp, grid)) {
    if (std::abs(phase_hessian(pp, span_of(x)).determinant()) < 1e-8)
      throw HypothesisError("b_process_ratio: det D^2 F below 1e-8 on the support grid");
  }
  const double D = spec.delta * spec.M;
  const double denom = std::pow(spec.T, d / 2.0) + std::pow(D, d) * std::pow(spec.T, -d / 2.0);
  return std::abs(eval_sum(spec, pp)) / denom;
}

TheoremExponents theorem_exponents(int d, int q) {
  if (d < 3) throw DomainError("theorem_exponents requires d >= 3");
  if (q < 1 || q > 20) throw DomainError("theorem_exponents requires 1 <= q <= 20");
  if (d == 3 && q > 2) throw DomainError("theorem_exponents: q must be 1 or 2 when d = 3");
  const std::int64_t n = d, Q = std::int64_t{1} << q;
  TheoremExponents e;
  e.d = d;
  e.q = q;
  e.w = Rational(n, 2 * n * (Q - 1) + 2 * Q);
  e.aqb_T = e.w;
  e.aqb_M = Rational(n) - Rational(q + 2) * e.w;
  const std::int64_t den = 2 * (Q - 1) * n * n + 2 * Q * n + 4 * Q;
  e.abab_T = Rational(n * n, den);
  e.abab_M = Rational(n) - Rational((q + 2) * n * n + n, den);
  e.aqb_restriction_lo = Rational(q) - Rational(2, n) + Rational(2, Q);
  e.restriction_lo = Rational(q) + Rational(2, Q) - Rational(1, n) - Rational(4, n * n);
  e.restriction_hi = Rational(q) + Rational(2, Q) + Rational(2, n - 2);
  return e;
}

DeltaScan delta_threshold_scan(const PhasePair& pp, int q, double M, std::span<const double> deltas, int grid) {
  pp.validate();
  const int d = pp.dimension;
  if (d < 2) throw DomainError("delta_threshold_scan requires d >= 2");
  std::vector<double> ds(deltas.begin(), deltas.end());
  std::sort(ds.begin(), ds.end(), std::greater<>());
  DeltaScan out;
  out.reference = INFINITY;
  const auto pts = support_grid(pp, grid);
  if (pts.empty()) throw DomainError("delta_threshold_scan: empty support grid");
  for (const Vec& x : pts) {
    const Jet j = finite_difference_jet(pp.F, span_of(x), q + 2, 1.0);
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) {
        MultiIndex nu(d, 0);
        nu[0] += 1;
        nu[i] += 1;
        nu[k] += 1;
        nu[d - 1] += q - 1;
        a(i, k) = j.derivative(nu);
      }
    out.reference = std::min(out.reference, std::abs(a.determinant()));
  }
  std::vector<IVec> shifts;
  for (int l = 0; l < q; ++l) {
    IVec r = IVec::Zero(d);
    r(l == 0 ? 0 : d - 1) = 1;
    shifts.push_back(r);
  }
  for (double delta : ds) {
    SumSpec spec{1.0, M, delta};
    const double H = delta * M / 4.0;
    if (!(H > 1.0)) throw ParameterError("delta_threshold_scan requires delta M / 4 > 1 for every scanned delta");
    const TransformedSum ts = a_process(spec, pp, q, shifts, H);
    DeltaScanRow row{delta, INFINITY};
    for (const auto& h : ts.tuples) {
      const DifferencedPair dp = ts.differenced(h);
      for (const Vec& x : support_grid(dp.pair, grid)) {
        const Mat hm = finite_difference_hessian(dp.pair.F, span_of(x), 1.0);
        row.min_det = std::min(row.min_det, std::abs(hm.determinant()));
      }
    }
    out.rows.push_back(row);
  }
  for (auto it = out.rows.rbegin(); it != out.rows.rend(); ++it) {
    if (it->min_det >= 0.5 * out.reference)
      out.threshold = it->delta;
    else
      break;
  }
  return out;
}

}  // namespace latrem
