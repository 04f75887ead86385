#include "latrem/lattice_count.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "latrem/errors.hpp"
#include "latrem/quadrature.hpp"

namespace latrem {

namespace {

constexpr double kEnumerationBudget = 1e9;

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Splits [lo, hi] into contiguous chunks, runs `task` on each and sums the
// partial counts in ascending chunk order.
std::int64_t partitioned_sum(std::int64_t lo, std::int64_t hi, int workers,
                             const std::function<std::int64_t(std::int64_t)>& task) {
  if (hi < lo) return 0;
  const std::int64_t n = hi - lo + 1;
  const int w = static_cast<int>(std::min<std::int64_t>(resolve_workers(workers), n));
  std::vector<std::int64_t> partial(w, 0);
  auto run = [&](int c) {
    const std::int64_t a = lo + n * c / w, b = lo + n * (c + 1) / w;
    std::int64_t s = 0;
    for (std::int64_t x = a; x < b; ++x) s += task(x);
    partial[c] = s;
  };
  if (w == 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    for (int c = 0; c < w; ++c) threads.emplace_back(run, c);
    for (auto& th : threads) th.join();
  }
  std::int64_t total = 0;
  for (std::int64_t s : partial) total += s;
  return total;
}

void check_t(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("dilation t must be finite and >= 0");
}

}  // namespace

std::int64_t count_bruteforce(const ConvexBody& body, double t, int workers) {
  check_t(t);
  const int d = body.dimension();
  const std::int64_t r = static_cast<std::int64_t>(std::floor(t * body.circumradius() * (1.0 + 1e-12) + 1e-12));
  const double work = d * std::pow(2.0 * t * body.circumradius() + 1.0, d);
  if (work > kEnumerationBudget) throw ResourceError("brute-force enumeration budget exceeded");
  return partitioned_sum(-r, r, workers, [&](std::int64_t x0) {
    std::vector<double> k(d, static_cast<double>(-r));
    k[0] = static_cast<double>(x0);
    std::int64_t c = 0;
    while (true) {
      if (body.contains(k, t)) ++c;
      int a = 1;
      while (a < d) {
        if (k[a] < r) {
          k[a] += 1.0;
          break;
        }
        k[a] = static_cast<double>(-r);
        ++a;
      }
      if (a == d) break;
    }
    return c;
  });
}

namespace {

struct SlicedCounter {
  const ConvexBody& body;
  double t;
  int d;
  std::vector<Mat> proj_inv;  // inverse of leading (j+1)x(j+1) block of Q

  // Integer range of coordinate j given the fixed prefix, from the projected
  // ellipsoid; widened slightly so that rounding never drops a fiber.
  bool range(int j, const std::vector<double>& x, std::int64_t& lo, std::int64_t& hi) const {
    const Mat& a = proj_inv[j];
    double b = 0.0, c = 0.0;
    for (int i = 0; i < j; ++i) {
      b += a(j, i) * x[i];
      for (int l = 0; l < j; ++l) c += x[i] * a(i, l) * x[l];
    }
    const double aa = a(j, j);
    const double t2 = t * t * (1.0 + 1e-9) + 1e-9;
    const double disc = b * b - aa * (c - t2);
    if (disc < 0.0) return false;
    const double sq = std::sqrt(disc);
    lo = static_cast<std::int64_t>(std::ceil((-b - sq) / aa - 1e-9));
    hi = static_cast<std::int64_t>(std::floor((-b + sq) / aa + 1e-9));
    return lo <= hi;
  }

  // Exact fiber count on the last coordinate: candidates from the quadratic,
  // then snapped to the membership predicate shared with the brute force.
  std::int64_t fiber(std::vector<double>& x) const {
    const int j = d - 1;
    const Mat& a = body.q_inverse();
    double b = 0.0, c = 0.0;
    for (int i = 0; i < j; ++i) {
      b += a(j, i) * x[i];
      for (int l = 0; l < j; ++l) c += x[i] * a(i, l) * x[l];
    }
    const double aa = a(j, j);
    const double disc = b * b - aa * (c - t * t);
    const double center = -b / aa;
    const double sq = disc > 0.0 ? std::sqrt(disc) : 0.0;
    auto member = [&](std::int64_t s) {
      x[j] = static_cast<double>(s);
      return body.contains(x, t);
    };
    std::int64_t lo = static_cast<std::int64_t>(std::ceil((-b - sq) / aa));
    std::int64_t hi = static_cast<std::int64_t>(std::floor((-b + sq) / aa));
    if (lo > hi || disc <= 0.0) {
      // Possibly empty or a single boundary point; probe around the center.
      const std::int64_t f = static_cast<std::int64_t>(std::floor(center));
      if (member(f)) {
        lo = hi = f;
      } else if (member(f + 1)) {
        lo = hi = f + 1;
      } else {
        return 0;
      }
    }
    if (!member(lo)) {
      while (lo <= hi && !member(lo)) ++lo;
      if (lo > hi) {
        if (disc > 0.0) throw NumericError("fiber interval solver failed to bracket");
        return 0;
      }
    } else {
      while (member(lo - 1)) --lo;
    }
    if (!member(hi)) {
      while (hi >= lo && !member(hi)) --hi;
    } else {
      while (member(hi + 1)) ++hi;
    }
    return hi - lo + 1;
  }

  std::int64_t level(int j, std::vector<double>& x) const {
    if (j == d - 1) return fiber(x);
    std::int64_t lo, hi;
    if (!range(j, x, lo, hi)) return 0;
    std::int64_t s = 0;
    for (std::int64_t v = lo; v <= hi; ++v) {
      x[j] = static_cast<double>(v);
      s += level(j + 1, x);
    }
    return s;
  }
};

}  // namespace

std::int64_t count_sliced(const ConvexBody& body, double t, int workers) {
  check_t(t);
  if (!body.is_ellipsoid()) throw DomainError("count_sliced requires an ellipsoid body");
  const int d = body.dimension();
  SlicedCounter sc{body, t, d, {}};
  for (int j = 0; j < d; ++j) {
    Mat block = body.q_matrix().topLeftCorner(j + 1, j + 1);
    sc.proj_inv.push_back(block.inverse());
  }
  std::vector<double> x0(d, 0.0);
  std::int64_t lo, hi;
  if (!sc.range(0, x0, lo, hi)) return 0;
  return partitioned_sum(lo, hi, workers, [&](std::int64_t v) {
    std::vector<double> x(d, 0.0);
    x[0] = static_cast<double>(v);
    return sc.level(1, x);
  });
}

std::vector<CountRecord> remainder_series(const ConvexBody& body, std::span<const double> t_grid, int workers) {
  if (!std::is_sorted(t_grid.begin(), t_grid.end())) throw DomainError("t grid must be sorted ascending");
  std::vector<CountRecord> out;
  out.reserve(t_grid.size());
  const double vol = body.volume();
  const int d = body.dimension();
  for (double t : t_grid) {
    CountRecord r;
    r.t = t;
    r.count = body.is_ellipsoid() ? count_sliced(body, t, workers) : count_bruteforce(body, t, workers);
    r.main_term = vol * std::pow(t, d);
    r.remainder = static_cast<double>(r.count) - r.main_term;
    out.push_back(r);
  }
  return out;
}

ExponentFit fit_envelope_exponent(std::span<const double> t, std::span<const double> remainder, int block) {
  if (t.size() != remainder.size()) throw DomainError("t and remainder sizes differ");
  if (block < 1) throw DomainError("block must be >= 1");
  double t0 = INFINITY;
  bool any = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > 0.0) t0 = std::min(t0, t[i]);
    if (std::abs(remainder[i]) >= 1e-9) any = true;
  }
  if (!any) throw NumericError("degenerate fit: all remainders vanish");
  struct Block {
    double max_abs = 0.0;
    double t_max = 0.0;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0)) continue;
    const double x = block * std::log2(t[i] / t0);
    const int b = x <= 1e-12 ? 0 : static_cast<int>(std::ceil(x - 1e-12)) - 1;
    if (b >= static_cast<int>(blocks.size())) blocks.resize(b + 1);
    blocks[b].t_max = std::max(blocks[b].t_max, t[i]);
    const double a = std::abs(remainder[i]);
    if (a >= 1e-9) blocks[b].max_abs = std::max(blocks[b].max_abs, a);
  }
  ExponentFit fit;
  fit.block = block;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].max_abs <= 0.0) continue;
    const double lo = t0 * std::exp2(static_cast<double>(b) / block);
    const double hi = t0 * std::exp2(static_cast<double>(b + 1) / block);
    const bool last = b + 1 == blocks.size();
    if (last && b > 0 && std::log(blocks[b].t_max / lo) < 0.5 * std::log(hi / lo)) continue;
    fit.samples.emplace_back(0.5 * (std::log(lo) + std::log(hi)), std::log(blocks[b].max_abs));
  }
  if (fit.samples.size() < 4) throw NumericError("degenerate fit: fewer than 4 blocks with nonzero envelope");
  double sx = 0, sy = 0;
  for (auto [x, y] : fit.samples) {
    sx += x;
    sy += y;
  }
  const double n = static_cast<double>(fit.samples.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (auto [x, y] : fit.samples) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (!std::isfinite(fit.slope)) throw NumericError("degenerate fit: non-finite slope");
  return fit;
}

ExponentFit fit_envelope_exponent(std::span<const CountRecord> records, int block) {
  std::vector<double> t, p;
  for (const auto& r : records) {
    t.push_back(r.t);
    p.push_back(r.remainder);
  }
  return fit_envelope_exponent(t, p, block);
}

namespace {

// Sub-interval of radii r in [0, 1] with k - eps r theta in tB.
std::pair<double, double> ray_interval(const ConvexBody& body, double t, double eps, std::span<const double> k,
                                       std::span<const double> theta) {
  const int d = body.dimension();
  if (body.is_ellipsoid()) {
    const Mat& a = body.q_inverse();
    double tat = 0, tak = 0, kak = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        tat += theta[i] * a(i, j) * theta[j];
        tak += theta[i] * a(i, j) * k[j];
        kak += k[i] * a(i, j) * k[j];
      }
    const double alpha = eps * eps * tat, beta = eps * tak, gamma = kak - t * t;
    const double disc = beta * beta - alpha * gamma;
    if (disc <= 0.0) return {0.0, 0.0};
    const double sq = std::sqrt(disc);
    // Cancellation-free roots of alpha r^2 - 2 beta r + gamma.
    const double q = beta + std::copysign(sq, beta);
    double r1 = q / alpha, r2 = q != 0.0 ? gamma / q : 0.0;
    if (r1 > r2) std::swap(r1, r2);
    return {std::clamp(r1, 0.0, 1.0), std::clamp(r2, 0.0, 1.0)};
  }
  std::vector<double> x(d);
  auto g = [&](double r) {
    for (int i = 0; i < d; ++i) x[i] = k[i] - eps * r * theta[i];
    return body.gauge(x) - t;
  };
  // Golden-section minimum of the convex function g on [0, 1].
  double a = 0.0, b = 1.0;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), e = a + phi * (b - a);
  double gc = g(c), ge = g(e);
  for (int it = 0; it < 80; ++it) {
    if (gc < ge) {
      b = e;
      e = c;
      ge = gc;
      c = b - phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = e;
      gc = ge;
      e = a + phi * (b - a);
      ge = g(e);
    }
  }
  double rmin = 0.5 * (a + b);
  if (g(0.0) <= g(rmin)) rmin = 0.0;
  if (g(1.0) <= g(rmin)) rmin = 1.0;
  if (g(rmin) > 0.0) return {0.0, 0.0};
  auto root = [&](double inside, double outside) {
    for (int it = 0; it < 100; ++it) {
      const double m = 0.5 * (inside + outside);
      (g(m) <= 0.0 ? inside : outside) = m;
    }
    return 0.5 * (inside + outside);
  };
  const double lo = g(0.0) <= 0.0 ? 0.0 : root(rmin, 0.0);
  const double hi = g(1.0) <= 0.0 ? 1.0 : root(rmin, 1.0);
  return {lo, hi};
}

}  // namespace

double mollified_indicator(const ConvexBody& body, double t, const Mollifier& mol, std::span<const double> k) {
  const int d = body.dimension();
  if (d != 2 && d != 3) throw DomainError("mollified counting is implemented for d = 2, 3");
  const double eps = mol.epsilon();
  const double gk = body.gauge(k);
  const double reach = eps / body.inradius();
  if (gk + reach <= t) return 1.0;
  if (gk - reach > t) return 0.0;
  auto ray = [&](std::span<const double> theta) {
    auto [lo, hi] = ray_interval(body, t, eps, k, theta);
    return hi > lo ? mol.radial_mass(hi) - mol.radial_mass(lo) : 0.0;
  };
  if (d == 2) {
    auto f = [&](double th) {
      const double u[2] = {std::cos(th), std::sin(th)};
      return ray(u);
    };
    CompensatedSum s;
    for (int q = 0; q < 16; ++q) s.add(integrate_adaptive(f, q * M_PI / 8, (q + 1) * M_PI / 8, 1e-12, 0.0, 50));
    return s.value();
  }
  auto inner = [&](double th) {
    auto f = [&](double ph) {
      const double u[3] = {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
      return ray(u);
    };
    CompensatedSum s;
    for (int q = 0; q < 8; ++q) s.add(integrate_adaptive(f, q * M_PI / 4, (q + 1) * M_PI / 4, 1e-11, 0.0, 50));
    return s.value() * std::sin(th);
  };
  CompensatedSum s;
  for (int q = 0; q < 8; ++q) s.add(integrate_adaptive(inner, q * M_PI / 8, (q + 1) * M_PI / 8, 1e-10, 0.0, 50));
  return s.value();
}

double mollified_count(const ConvexBody& body, double t, const Mollifier& mol) {
  check_t(t);
  if (mol.dimension() != body.dimension()) throw DomainError("mollifier dimension mismatch");
  if (mol.epsilon() > 1.0) throw DomainError("mollified_count requires eps <= 1");
  const int d = body.dimension();
  const std::int64_t r =
      static_cast<std::int64_t>(std::floor(t * body.circumradius() + mol.epsilon() / body.inradius() * body.circumradius() + 1.0));
  std::vector<double> k(d, static_cast<double>(-r));
  std::int64_t inside = 0;
  CompensatedSum shell;
  while (true) {
    const double v = mollified_indicator(body, t, mol, k);
    if (v == 1.0)
      ++inside;
    else if (v != 0.0)
      shell.add(v);
    int a = 0;
    while (a < d) {
      if (k[a] < r) {
        k[a] += 1.0;
        break;
      }
      k[a] = static_cast<double>(-r);
      ++a;
    }
    if (a == d) break;
  }
  return static_cast<double>(inside) + shell.value();
}

SandwichResult sandwich_check(const ConvexBody& body, double t, const Mollifier& mol, double c1) {
  const double eps = mol.epsilon();
  if (!(c1 > 0.0)) throw DomainError("C1 must be positive");
  if (!(t - c1 * eps > 0.0)) throw DomainError("sandwich_check requires t - C1 eps > 0");
  const double count = static_cast<double>(body.is_ellipsoid() ? count_sliced(body, t) : count_bruteforce(body, t));
  SandwichResult r;
  r.lower_margin = count - mollified_count(body, t - c1 * eps, mol);
  r.upper_margin = mollified_count(body, t + c1 * eps, mol) - count;
  // Shell contributions are quadratures; allow their accumulated tolerance.
  r.holds = r.lower_margin >= -1e-8 && r.upper_margin >= -1e-8;
  return r;
}

double calibrate_c1(const ConvexBody& body, std::span<const double> t_grid, std::span<const double> eps_grid) {
  for (double c1 = 0.5; c1 <= 64.0; c1 *= 2.0) {
    bool ok = true;
    for (double eps : eps_grid) {
      Mollifier mol(body.dimension(), eps);
      for (double t : t_grid) {
        if (!(t - c1 * eps > 0.0) || !sandwich_check(body, t, mol, c1).holds) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
    }
    if (ok) return c1;
  }
  throw NumericError("no C1 <= 64 satisfies the sandwich inequality on the grid");
}

ExponentTable exponent_table(int d) {
  if (d < 3) throw DomainError("exponent_table requires d >= 3");
  const std::int64_t n = d;
  ExponentTable e;
  e.hlawka = Rational(2, n + 1);
  if (d == 3)
    e.muller_lambda = Rational(20, 43);
  else if (d == 4)
    e.muller_lambda = Rational(6, 17);
  else
    e.muller_lambda = Rational(n + 4, n * n + n + 2);
  if (d == 3)
    e.beta = Rational(73, 158);
  else
    e.beta = Rational(n * n + 3 * n + 8, n * n * n + n * n + 5 * n + 4);
  e.conjecture = Rational(0);
  e.conjecture_epsilon = d <= 4;
  return e;
}

}  // namespace latrem
