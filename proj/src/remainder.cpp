#include "latrem/remainder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <unordered_map>

#include "latrem/errors.hpp"
#include "latrem/exp_sum.hpp"
#include "latrem/lattice_count.hpp"
#include "latrem/oscillatory.hpp"

namespace latrem {

namespace {

constexpr double kEnvelopeStep = 0.01;
constexpr double kEnvelopeMax = 160.0;  // rho^ sits at the rounding floor beyond this

double smooth_f(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

double vnorm(std::span<const double> y) {
  double s = 0.0;
  for (double v : y) s += v * v;
  return std::sqrt(s);
}

std::span<const double> span_of(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// Suffix maxima of |rho^| over the cells [i h, (i + 1) h] of [0, kEnvelopeMax].
// Each cell is sampled at 5 points and padded by 1e-3 relative, since the
// interpolated transform can peak between nodes. rho^ is undilated, so one
// table serves a dimension.
class Envelope {
 public:
  explicit Envelope(const Mollifier& mol) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[mol.dimension()];
    if (!slot) {
      const int n = static_cast<int>(std::lround(kEnvelopeMax / kEnvelopeStep));
      auto v = std::make_shared<std::vector<double>>(n + 1, 0.0);
      for (int i = 0; i < n; ++i)
        for (int k = 0; k <= 4; ++k)
          (*v)[i] = std::max((*v)[i], (1.0 + 1e-3) * std::abs(mol.fourier((i + 0.25 * k) * kEnvelopeStep)));
      for (int i = n - 1; i >= 0; --i) (*v)[i] = std::max((*v)[i], (*v)[i + 1]);
      slot = v;
    }
    suffix_ = slot;
  }
  double operator()(double omega) const {
    omega = std::abs(omega);
    if (omega >= kEnvelopeMax) return 0.0;
    const auto i = static_cast<std::size_t>(std::floor(omega / kEnvelopeStep));
    return (*suffix_)[std::min(i, suffix_->size() - 1)];
  }

 private:
  std::shared_ptr<const std::vector<double>> suffix_;
};

std::uint64_t pack(const IVec& g) {
  std::uint64_t key = 0;
  for (Eigen::Index i = 0; i < g.size(); ++i) key = (key << 21) | static_cast<std::uint64_t>(g(i) + (1 << 20));
  return key;
}

}  // namespace

double DyadicPartition::step(double s) {
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  const double a = smooth_f(2.0 - s), b = smooth_f(s - 1.0);
  return a / (a + b);
}

double DyadicPartition::psi(double r) const { return step(r) - step(2.0 * r); }

double DyadicPartition::psi(std::span<const double> y) const { return psi(vnorm(y)); }

double DyadicPartition::partial_sum(std::span<const double> y, int j0, int j1) const {
  const double r = vnorm(y);
  double s = 0.0;
  for (int j = j0; j <= j1; ++j) s += psi(std::ldexp(r, -j));
  return s;
}

SphericalPartition::SphericalPartition(int dimension, std::int64_t N) : dim_(dimension), N_(N) {
  if (dimension < 1 || dimension > 3) throw DomainError("SphericalPartition requires 1 <= d <= 3");
  if (N < 1) throw ParameterError("SphericalPartition requires N >= 1");
  r_ = 1.0 / (2.0 * static_cast<double>(N));
  h_ = 0.8 * r_ / std::sqrt(static_cast<double>(dimension));
}

bool SphericalPartition::kept(const IVec& g) const {
  std::array<std::int64_t, 3> a{};
  for (int i = 0; i < dim_; ++i) a[i] = g(i);
  return kept_grid(a);
}

bool SphericalPartition::kept_grid(const std::array<std::int64_t, 3>& g) const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += static_cast<double>(g[i]) * static_cast<double>(g[i]);
  const double n = h_ * std::sqrt(s);
  return n > 0.5 - r_ && n < 2.0 + r_ && n > 0.0;
}

Vec SphericalPartition::center(const IVec& g) const {
  Vec p = h_ * g.cast<double>();
  const double n = p.norm();
  if (n < 0.5) p *= 0.5 / n;
  if (n > 2.0) p *= 2.0 / n;
  return p;
}

double SphericalPartition::bump_grid(const std::array<std::int64_t, 3>& g, std::span<const double> y) const {
  double c[3], n2 = 0.0;
  for (int i = 0; i < dim_; ++i) {
    c[i] = h_ * static_cast<double>(g[i]);
    n2 += c[i] * c[i];
  }
  const double n = std::sqrt(n2);
  const double f = n < 0.5 ? 0.5 / n : (n > 2.0 ? 2.0 / n : 1.0);
  double s2 = 0.0;
  for (int i = 0; i < dim_; ++i) s2 += (y[i] - f * c[i]) * (y[i] - f * c[i]);
  const double u = s2 / (r_ * r_);
  return u < 1.0 ? std::exp(-1.0 / (1.0 - u)) : 0.0;
}

template <class Visit>
void SphericalPartition::for_each_bump(std::span<const double> y, Visit visit) const {
  // A kept grid point moves by less than r under projection, so its center
  // is within r of y only if the grid point is within 2r.
  std::array<std::int64_t, 3> lo{}, hi{}, g{};
  for (int i = 0; i < dim_; ++i) {
    lo[i] = static_cast<std::int64_t>(std::ceil((y[i] - 2.0 * r_) / h_));
    hi[i] = static_cast<std::int64_t>(std::floor((y[i] + 2.0 * r_) / h_));
    if (hi[i] < lo[i]) return;
    g[i] = lo[i];
  }
  while (true) {
    double s2 = 0.0;
    for (int i = 0; i < dim_; ++i) s2 += (h_ * g[i] - y[i]) * (h_ * g[i] - y[i]);
    if (s2 < 4.0 * r_ * r_ && kept_grid(g)) {
      const double b = bump_grid(g, y);
      if (b > 0.0) visit(g, b);
    }
    int a = dim_ - 1;
    while (a >= 0 && g[a] == hi[a]) {
      g[a] = lo[a];
      --a;
    }
    if (a < 0) break;
    ++g[a];
  }
}

std::vector<SphericalPartition::Weight> SphericalPartition::weights(std::span<const double> y) const {
  if (static_cast<int>(y.size()) != dim_) throw DomainError("SphericalPartition: point has wrong dimension");
  std::vector<Weight> out;
  double total = 0.0;
  for_each_bump(y, [&](const std::array<std::int64_t, 3>& g, double b) {
    IVec idx(dim_);
    for (int i = 0; i < dim_; ++i) idx(i) = g[i];
    out.push_back({idx, b});
    total += b;
  });
  for (auto& w : out) w.value /= total;
  return out;
}

double SphericalPartition::value(const IVec& index, std::span<const double> y) const {
  std::array<std::int64_t, 3> a{};
  for (int i = 0; i < dim_; ++i) a[i] = index(i);
  if (!kept_grid(a)) return 0.0;
  const double b = bump_grid(a, y);
  if (b == 0.0) return 0.0;
  double total = 0.0;
  for_each_bump(y, [&](const std::array<std::int64_t, 3>&, double v) { total += v; });
  return b / total;
}

int SphericalPartition::overlap(std::span<const double> y) const {
  int n = 0;
  for_each_bump(y, [&](const std::array<std::int64_t, 3>&, double) { ++n; });
  return n;
}

int SphericalPartition::overlap_bound() const {
  // A ball of radius 2r lies in a cube of side 4r, which holds at most
  // floor(4r / h) + 1 grid points per axis.
  return static_cast<int>(std::pow(std::floor(4.0 * r_ / h_) + 1.0, dim_));
}

std::int64_t SphericalPartition::patch_count() const {
  const auto m = static_cast<std::int64_t>(std::ceil((2.0 + r_) / h_));
  std::int64_t n = 0;
  IVec g = IVec::Constant(dim_, -m);
  while (true) {
    if (kept(g)) ++n;
    int a = dim_ - 1;
    while (a >= 0 && g(a) == m) {
      g(a) = -m;
      --a;
    }
    if (a < 0) break;
    ++g(a);
  }
  return n;
}

double SphericalPartition::derivative_constant(int order, int samples, std::uint64_t seed) const {
  if (order != 1 && order != 2) throw ParameterError("derivative_constant supports orders 1 and 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> radius(0.5, 2.0);
  const double step = 1e-3 * r_;
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vec y(dim_);
    for (int i = 0; i < dim_; ++i) y(i) = gauss(rng);
    y *= radius(rng) / y.norm();
    for (const auto& w : weights(span_of(y))) {
      auto f = [&](const Vec& p) { return value(w.index, span_of(p)); };
      for (int a = 0; a < dim_; ++a) {
        const Vec ea = Vec::Unit(dim_, a) * step;
        if (order == 1) {
          worst = std::max(worst, std::abs(f(y + ea) - f(y - ea)) / (2.0 * step));
          continue;
        }
        for (int b = a; b < dim_; ++b) {
          const Vec eb = Vec::Unit(dim_, b) * step;
          const double v = (f(y + ea + eb) - f(y + ea - eb) - f(y - ea + eb) + f(y - ea - eb)) / (4.0 * step * step);
          worst = std::max(worst, std::abs(v));
        }
      }
    }
  }
  return worst / std::pow(static_cast<double>(N_), order);
}

double rho_hat_envelope(const Mollifier& mol, double omega) { return Envelope(mol)(omega); }

REpsilonResult r_epsilon_direct(const ConvexBody& body, double t, const Mollifier& mol, double k_radius,
                                double tail_tol, bool with_space_side) {
  const int d = body.dimension();
  if (!body.is_ellipsoid()) throw DomainError("r_epsilon_direct requires an ellipsoid (closed-form chi^)");
  if (d < 2 || d > 3) throw DomainError("r_epsilon_direct requires d in {2, 3}");
  if (mol.dimension() != d) throw DomainError("mollifier dimension does not match the body");
  if (!(t > 0.0) || !(k_radius >= 1.0) || !std::isfinite(k_radius))
    throw ParameterError("r_epsilon_direct requires t > 0 and a finite k_radius >= 1");
  const double eps = mol.epsilon();
  const auto K = static_cast<std::int64_t>(std::floor(k_radius));
  if (std::pow(2.0 * K + 1.0, d) > 1e9) throw ResourceError("r_epsilon_direct: k_radius too large");

  REpsilonResult out;
  CompensatedSum sum;
  IVec k = IVec::Constant(d, -K);
  Vec xi(d);
  while (true) {
    const double n2 = static_cast<double>(k.squaredNorm());
    if (n2 > 0.0 && n2 <= k_radius * k_radius) {
      const double rho = mol.fourier(eps * std::sqrt(n2));
      if (rho != 0.0) {
        for (int i = 0; i < d; ++i) xi(i) = t * static_cast<double>(k(i));
        sum.add(chi_hat_ellipsoid(body, span_of(xi)) * rho);
      }
      ++out.terms;
    }
    int a = d - 1;
    while (a >= 0 && k(a) == K) {
      k(a) = -K;
      --a;
    }
    if (a < 0) break;
    ++k(a);
  }
  const double td = std::pow(t, d);
  out.dual = td * sum.value();

  // |chi_ball^(rho)| ~ rho^{-(d+1)/2} / pi, with rho >= sqrt(lambda_min) t |k|.
  const Envelope env(mol);
  const double lmin = Eigen::SelfAdjointEigenSolver<Mat>(body.q_matrix()).eigenvalues().minCoeff();
  const double sdet = std::sqrt(body.q_matrix().determinant());
  const double area = d * unit_ball_volume(d);
  const double s_end = kEnvelopeMax / eps;
  double tail = 0.0;
  if (k_radius < s_end) {
    const int n = 4000;
    const double h = (s_end - k_radius) / n;
    for (int i = 0; i < n; ++i) {
      const double s = k_radius + (i + 0.5) * h;
      tail += area * std::pow(s, d - 1) * std::pow(t * std::sqrt(lmin) * s, -(d + 1) / 2.0) * env(eps * s) * h;
    }
  }
  out.tail_estimate = td * sdet * tail / M_PI;
  out.tail_flag = out.tail_estimate > tail_tol;
  if (with_space_side) out.space = mollified_count(body, t, mol) - body.volume() * td;
  return out;
}

S1Assembly s1_assembly(const ConvexBody& body, double t, const Mollifier& mol, std::int64_t N,
                       const S1Options& opt) {
  const int d = body.dimension();
  if (d < 2 || d > 3) throw DomainError("s1_assembly requires d in {2, 3}");
  if (mol.dimension() != d) throw DomainError("mollifier dimension does not match the body");
  if (!(t > 0.0)) throw ParameterError("s1_assembly requires t > 0");
  if (N < 1) throw ParameterError("s1_assembly requires N >= 1");
  const double eps = mol.epsilon();
  const int N1 = opt.N1 >= 0 ? opt.N1 : (d + 1) / 2 + 2;
  const DyadicPartition dy;
  const SphericalPartition sp(d, N);
  const Envelope env(mol);

  S1Assembly out;
  // Scale range: the envelope cut (terms with |k| > 2^J below the floor) or
  // the term budget, whichever is smaller.
  int j_env = 0;
  while (env(eps * std::ldexp(1.0, j_env)) >= opt.envelope_floor) ++j_env;
  int j_bud = 0;
  while (unit_ball_volume(d) * std::pow(std::ldexp(1.0, j_bud + 2), d) <= static_cast<double>(opt.term_budget))
    ++j_bud;
  out.j_max = std::min(j_env, j_bud);
  out.budget_bound = j_bud < j_env;
  const int J = out.j_max;
  const auto R = static_cast<std::int64_t>(std::ldexp(1.0, J + 1));

  struct ScaleAcc {
    CompensatedComplexSum value, patches;
    std::unordered_map<std::uint64_t, std::pair<IVec, CompensatedComplexSum>> per_patch;
  };
  std::vector<ScaleAcc> acc(J + 1);
  CompensatedComplexSum direct;
  const double pre = std::pow(t, (d - 1) / 2.0);

  IVec k = IVec::Constant(d, -R);
  Vec kv(d), y(d);
  while (true) {
    const double n2 = static_cast<double>(k.squaredNorm());
    const double kn = std::sqrt(n2);
    if (n2 > 0.0 && kn < static_cast<double>(R)) {
      for (int i = 0; i < d; ++i) kv(i) = static_cast<double>(k(i));
      const double base = std::pow(kn, -(d + 1) / 2.0) / std::sqrt(body.gauss_curvature(span_of(kv))) *
                          mol.fourier(eps * kn);
      const Complex term = pre * base * unit_phase(t * body.support(span_of(kv)));
      direct.add(DyadicPartition::step(std::ldexp(kn, -J)) * term);
      for (int j = 0; j <= J; ++j) {
        const double ps = dy.psi(std::ldexp(kn, -j));
        if (ps == 0.0) continue;
        acc[j].value.add(ps * term);
        for (int i = 0; i < d; ++i) y(i) = std::ldexp(kv(i), -j);
        for (const auto& w : sp.weights(span_of(y))) {
          const Complex v = w.value * ps * term;
          acc[j].patches.add(v);
          auto& slot = acc[j].per_patch[pack(w.index)];
          if (slot.first.size() == 0) slot.first = w.index;
          slot.second.add(v);
        }
      }
    }
    int a = d - 1;
    while (a >= 0 && k(a) == R) {
      k(a) = -R;
      --a;
    }
    if (a < 0) break;
    ++k(a);
  }

  CompensatedComplexSum s1;
  for (int j = 0; j <= J; ++j) {
    ScaleRecord rec;
    rec.j = j;
    rec.M = std::ldexp(1.0, j);
    rec.value = acc[j].value.value();
    rec.patch_total = acc[j].patches.value();
    rec.patches = static_cast<std::int64_t>(acc[j].per_patch.size());
    const double scale = std::max(std::abs(rec.value), 1e-300);
    rec.partition_residual = std::abs(rec.patch_total - rec.value) / scale;
    rec.tail_model = pre * std::pow(rec.M, (d - 1) / 2.0) * std::pow(1.0 + rec.M * eps, -N1);
    rec.envelope = env(eps * rec.M / 2.0);
    out.partition_residual = std::max(out.partition_residual, rec.partition_residual);
    s1.add(rec.value);
    for (auto& [key, slot] : acc[j].per_patch)
      out.per_patch[{j, std::vector<std::int64_t>(slot.first.data(), slot.first.data() + d)}] = slot.second.value();
    out.per_scale.push_back(rec);
  }
  out.S1 = s1.value();
  out.direct = direct.value();
  out.dyadic_residual = std::abs(out.S1 - out.direct) / std::max(std::abs(out.direct), 1e-300);
  if (out.partition_residual > 1e-9)
    throw NumericError("s1_assembly: partition-of-unity identity violated (residual " +
                       std::to_string(out.partition_residual) + ")");

  // Tail model: non-increasing above the cutoff 2^j eps >= 1, and the measured
  // scale sums stay under it once scaled by the ratio at the first such scale.
  out.tail_monotone = true;
  double ratio = -1.0, prev = INFINITY;
  for (const auto& rec : out.per_scale) {
    if (rec.M * eps < 1.0) continue;
    if (rec.tail_model > prev * (1.0 + 1e-12)) out.tail_monotone = false;
    prev = rec.tail_model;
    const double r = std::abs(rec.value) / rec.tail_model;
    if (ratio < 0.0)
      ratio = std::max(r, 1e-300);
    else if (r > ratio * (1.0 + 1e-9))
      out.tail_monotone = false;
  }

  if (opt.coset_check) {
    // Smallest scale with M > N, at its heaviest patch.
    const ScaleRecord* pick = nullptr;
    for (const auto& rec : out.per_scale)
      if (rec.M > static_cast<double>(N) && rec.patches > 0) {
        pick = &rec;
        break;
      }
    if (pick != nullptr) {
      const int j = pick->j;
      const double M = pick->M;
      const std::vector<std::int64_t>* best = nullptr;
      double best_abs = -1.0;
      for (const auto& [key, v] : out.per_patch)
        if (key.first == j && std::abs(v) > best_abs) {
          best_abs = std::abs(v);
          best = &key.second;
        }
      IVec patch(d);
      for (int i = 0; i < d; ++i) patch(i) = (*best)[i];
      CosetCheck cc;
      cc.j = j;
      cc.patch = patch;
      cc.xi = sp.center(patch);
      cc.patch_value = out.per_patch.at({j, *best});
      FrameOptions fo;
      fo.enforce_threshold = false;
      const FrameResult fr = build_frame(body, span_of(cc.xi), opt.q, N, fo);
      cc.L = fr.frame.L;
      cc.alpha = fr.construction.alpha;
      const CosetDecomposition cd = coset_decomposition(fr.frame);
      const Mat V = fr.frame.V.cast<double>();
      const double delta = 1.0 / static_cast<double>(N);
      const double lift = std::pow(M, (d + 1) / 2.0) * std::pow(1.0 + M * eps, N1);
      SumSpec spec;
      spec.T = t * M;
      spec.M = M;
      spec.delta = delta;
      CompensatedComplexSum total;
      for (const auto& b : cd.reps) {
        const Vec bv = b.cast<double>();
        PhasePair pp;
        pp.dimension = d;
        pp.G = [&, bv](std::span<const double> x) {
          const Vec xv = Eigen::Map<const Vec>(x.data(), d);
          Vec kk = M * delta * (V * xv) + bv;
          for (int i = 0; i < d; ++i) kk(i) = std::round(kk(i));
          const double kn = kk.norm();
          if (kn == 0.0) return 0.0;
          Vec yy = kk / M;
          const double ps = dy.psi(kn / M);
          if (ps == 0.0) return 0.0;
          const double wi = sp.value(patch, span_of(yy));
          if (wi == 0.0) return 0.0;
          const double base = std::pow(kn, -(d + 1) / 2.0) / std::sqrt(body.gauss_curvature(span_of(kk))) *
                              mol.fourier(eps * kn);
          return lift * wi * ps * base;
        };
        pp.F = [&, bv](std::span<const double> x) {
          const Vec xv = Eigen::Map<const Vec>(x.data(), d);
          Vec kk = M * delta * (V * xv) + bv;
          for (int i = 0; i < d; ++i) kk(i) = std::round(kk(i));
          return body.support(span_of(kk)) / M;
        };
        const double r = sp.radius();
        pp.omega.centers.push_back(cc.xi - bv / M);
        pp.omega.radii.push_back(2.0 * r);
        pp.omega.maps.push_back(delta * V);
        pp.margin = r / (delta * V).jacobiSvd().singularValues()(0);
        total.add(eval_sum(spec, pp));
      }
      cc.resummed = pre * std::pow(M, -(d + 1) / 2.0) * std::pow(1.0 + M * eps, -N1) * total.value();
      cc.residual = std::abs(cc.resummed - cc.patch_value) / std::max(std::abs(cc.patch_value), 1e-300);
      out.coset = cc;
    }
  }
  return out;
}

EpsilonBalance balance_epsilon(int d) {
  if (d < 3) throw DomainError("balance_epsilon requires d >= 3");
  EpsilonBalance out;
  out.d = d;
  out.q = d == 3 ? 2 : 1;
  // S_{1,M} << t^a M^m (1 + M eps)^{-N1} from the exponential-sum bound with
  // Q = 2^q; summing dyadic M up to 1/eps gives t^a eps^{-m}.
  const std::int64_t Q = std::int64_t{1} << out.q;
  const Rational D = Rational(2 * (Q - 1) * d * d + 2 * Q * d + 4 * Q);
  const Rational x = Rational(d * d) / D;
  const Rational y = Rational((out.q + 2) * d * d + d) / D;
  const Rational half_dm1 = Rational(d - 1, 2);
  const Rational a = half_dm1 + x;
  const Rational m = half_dm1 + x - y;
  // t^{a + s m} = t^{d - 1 - s}
  const Rational s = (Rational(d - 1) - a) / (Rational(1) + m);
  out.epsilon_exponent = s;
  out.beta = Rational(1) - s;
  out.second_term_t = a + s * m;
  out.third_term_t = Rational(d - 1) - s;
  out.balanced = out.second_term_t == out.third_term_t;
  return out;
}

TermDominance three_term_report(int d, double t, double eps) {
  const EpsilonBalance b = balance_epsilon(d);
  const std::int64_t Q = std::int64_t{1} << b.q;
  const double D = static_cast<double>(2 * (Q - 1) * d * d + 2 * Q * d + 4 * Q);
  const double x = d * d / D, y = ((b.q + 2) * d * d + d) / D;
  const double a = (d - 1) / 2.0 + x, m = (d - 1) / 2.0 + x - y;
  TermDominance out;
  out.first = std::pow(t, d - 2 + 1.0 / d);
  out.second = std::pow(t, a) * std::pow(eps, -m);
  out.third = std::pow(t, d - 1) * eps;
  // Ties within 1e-9 relative are reported as such ("second=third").
  const std::pair<const char*, double> terms[] = {{"first", out.first}, {"second", out.second}, {"third", out.third}};
  const double top = std::max({out.first, out.second, out.third});
  for (const auto& [name, v] : terms) {
    if (std::abs(v - top) > 1e-9 * top) continue;
    if (!out.dominant.empty()) out.dominant += "=";
    out.dominant += name;
  }
  return out;
}

}  // namespace latrem
