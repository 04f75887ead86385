#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "latrem/errors.hpp"
#include "latrem/oscillatory.hpp"
#include "latrem/remainder.hpp"

using namespace latrem;

namespace {

std::span<const double> sp(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

Vec random_point(int d, std::mt19937_64& rng, double lo, double hi) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = g(rng);
  return std::exp(u(rng)) * v.normalized();
}

// smooth step from 1 on [0, 1] to 0 on [2, inf), written out independently
double step_ref(double s) {
  auto f = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  return f(2.0 - s) / (f(2.0 - s) + f(s - 1.0));
}

}  // namespace

TEST_CASE("dyadic partition of unity") {
  const DyadicPartition p;
  std::mt19937_64 rng(61);
  for (int n = 0; n < 1000; ++n) {
    const Vec y = random_point(1 + n % 3, rng, 1e-3, 1e6);
    CHECK(std::abs(p.partial_sum(sp(y), -12, 24) - 1.0) <= 1e-10);
    const double r = y.norm();
    CHECK(p.psi(r) == doctest::Approx(step_ref(r) - step_ref(2.0 * r)).epsilon(1e-12));
    CHECK(p.psi(r) >= 0.0);
    CHECK(p.psi(r) <= 1.0);
  }
  CHECK(p.psi(0.49) == 0.0);
  CHECK(p.psi(2.01) == 0.0);
  CHECK(p.psi(1.0) == doctest::Approx(1.0));
}

TEST_CASE("spherical partition of unity") {
  std::mt19937_64 rng(62);
  for (auto [d, N] : {std::pair<int, std::int64_t>{2, 4}, {2, 8}, {3, 2}, {3, 4}}) {
    const SphericalPartition sp_(d, N);
    CHECK(sp_.radius() == doctest::Approx(1.0 / (2.0 * N)));
    int worst = 0;
    for (int n = 0; n < 1000; ++n) {
      const Vec y = random_point(d, rng, 0.5, 2.0);
      double s = 0.0;
      for (const auto& w : sp_.weights(sp(y))) {
        s += w.value;
        CHECK((sp_.center(w.index) - y).norm() < sp_.radius());
        const Vec c = sp_.center(w.index);
        CHECK(c.norm() >= 0.5 - 1e-12);
        CHECK(c.norm() <= 2.0 + 1e-12);
        CHECK(w.value == doctest::Approx(sp_.value(w.index, sp(y))).epsilon(1e-14));
      }
      CHECK(std::abs(s - 1.0) <= 1e-10);
      worst = std::max(worst, sp_.overlap(sp(y)));
    }
    CHECK(worst <= sp_.overlap_bound());
    CHECK(sp_.patch_count() > 0);
    const double c1 = sp_.derivative_constant(1, 50), c2 = sp_.derivative_constant(2, 50);
    CHECK(std::isfinite(c1));
    CHECK(std::isfinite(c2));
    CHECK(c1 > 0.0);
  }
}

TEST_CASE("derivative constants stay bounded as N doubles") {
  const double a = SphericalPartition(2, 4).derivative_constant(1, 200);
  const double b = SphericalPartition(2, 16).derivative_constant(1, 200);
  CHECK(b <= 4.0 * a);
  CHECK(a <= 4.0 * b);
}

TEST_CASE("S1 decomposition identities") {
  struct Case {
    int d;
    double t, eps;
    std::int64_t N, budget;
  };
  for (const Case c : {Case{2, 6.0, 0.3, 2, 100000}, Case{3, 3.0, 0.6, 2, 60000}}) {
    const ConvexBody ball = ConvexBody::ball(c.d);
    S1Options o;
    o.term_budget = c.budget;
    const S1Assembly s = s1_assembly(ball, c.t, Mollifier(c.d, c.eps), c.N, o);
    const double scale = std::max(1.0, std::abs(s.direct));
    CHECK(s.dyadic_residual <= 1e-9 * scale);
    CHECK(s.partition_residual <= 1e-9 * scale);
    REQUIRE(s.coset.has_value());
    CHECK(s.coset->residual <= 1e-12 * std::max(1.0, std::abs(s.coset->patch_value)));
    CHECK(s.coset->L > 0);
    CHECK(s.tail_monotone);
    CHECK(s.per_scale.size() == static_cast<std::size_t>(s.j_max + 1));
    Complex tot = 0.0;
    for (const auto& r : s.per_scale) tot += r.value;
    CHECK(std::abs(tot - s.S1) <= 1e-12 * scale);
    Complex pt = 0.0;
    for (const auto& [key, v] : s.per_patch) pt += v;
    CHECK(std::abs(pt - s.S1) <= 1e-9 * scale);
  }
}

TEST_CASE("epsilon balance") {
  EpsilonBalance b = balance_epsilon(4);
  CHECK(b.epsilon_exponent == Rational(17, 26));
  CHECK(b.beta == Rational(9, 26));
  CHECK(b.balanced);
  b = balance_epsilon(3);
  CHECK(b.q == 2);
  CHECK(b.beta == Rational(73, 158));
  CHECK(b.second_term_t == b.third_term_t);
  for (std::int64_t d = 4; d <= 30; ++d) {
    const EpsilonBalance e = balance_epsilon(static_cast<int>(d));
    const std::int64_t den = d * d * d + d * d + 5 * d + 4;
    CHECK(e.epsilon_exponent == Rational(d * d * d + 2 * d - 4, den));
    CHECK(e.beta == Rational(d * d + 3 * d + 8, den));
    // a + s m = d - 1 - s, with the second term t^a eps^{-m} and eps = t^{-s}
    const Rational s = e.epsilon_exponent;
    const Rational a = Rational(d - 1, 2) + Rational(d * d, 2 * (d * d + 2 * d + 4));
    const Rational m = Rational(d - 1, 2) - Rational(2 * d * d + d, 2 * (d * d + 2 * d + 4));
    CHECK(a + s * m == Rational(d - 1) - s);
    CHECK(e.second_term_t == e.third_term_t);
  }
  CHECK_THROWS_AS(balance_epsilon(2), DomainError);
}

TEST_CASE("three-term report") {
  for (int d : {3, 4, 5}) {
    const double t = 1e4;
    const double eps = std::pow(t, -balance_epsilon(d).epsilon_exponent.to_double());
    const TermDominance r = three_term_report(d, t, eps);
    CHECK(r.second == doctest::Approx(r.third).epsilon(1e-9));
    CHECK(r.dominant == "second=third");
    CHECK(r.first < r.third);
    CHECK(three_term_report(d, t, 0.5 * eps).dominant == "second");
    CHECK(three_term_report(d, t, 2.0 * eps).dominant == "third");
  }
}

TEST_CASE("R_eps dual side against the space side") {
  const ConvexBody b2 = ConvexBody::ball(2);
  const REpsilonResult r = r_epsilon_direct(b2, 10.0, Mollifier(2, 0.2), 130.0 / 0.2);
  CHECK_FALSE(r.tail_flag);
  CHECK(std::abs(r.dual - r.space) <= 1e-6);
  CHECK(std::abs(r.dual.imag()) <= 1e-12 * (1.0 + std::abs(r.dual)));
  std::vector<double> mags;
  for (double e : {0.05, 0.2, 0.5, 0.75, 1.0}) {
    const REpsilonResult x = r_epsilon_direct(b2, 5.0, Mollifier(2, e), 40.0 / e, 1.0, false);
    CHECK(std::abs(x.dual.imag()) <= 1e-12 * (1.0 + std::abs(x.dual)));
    mags.push_back(std::abs(x.dual));
  }
  for (std::size_t i = 1; i < mags.size(); ++i) CHECK(mags[i] < mags[i - 1]);
  CHECK(mags.back() <= 0.05 * mags.front());
  std::mt19937_64 rng(63);
  const Mat q = (Mat(2, 2) << 1.3, 0.2, 0.2, 0.8).finished();
  const REpsilonResult e = r_epsilon_direct(ConvexBody::ellipsoid(q), 7.0, Mollifier(2, 0.3), 130.0 / 0.3, 1e-6, false);
  CHECK(std::abs(e.dual.imag()) <= 1e-12 * (1.0 + std::abs(e.dual)));
}

TEST_CASE("chi hat model error inside R_eps, d = 3") {
  // t^3 sum_k (chi^(tk) - model(tk)) rho^(eps k) is predicted to scale like
  // t^0 eps^0; the signed sum oscillates, so the t-envelope is compared.
  const ConvexBody b3 = ConvexBody::ball(3);
  for (double eps : {0.5, 0.7, 1.0}) {
    const Mollifier mol(3, eps);
    const int K = static_cast<int>(20.0 / eps);
    std::map<long, long> shells;
    for (int a = -K; a <= K; ++a)
      for (int b = -K; b <= K; ++b)
        for (int c = -K; c <= K; ++c) {
          const long n = a * a + b * b + c * c;
          if (n > 0 && n <= static_cast<long>(K) * K) ++shells[n];
        }
    auto err = [&](double t) {
      double s = 0.0;
      for (auto [n, cnt] : shells) {
        const double r = std::sqrt(static_cast<double>(n));
        const std::vector<double> xi{t * r, 0.0, 0.0};
        const double w = 2.0 * M_PI * t * r;
        const double exact = (std::sin(w) - w * std::cos(w)) / (2.0 * M_PI * M_PI * std::pow(t * r, 3.0));
        s += cnt * (exact - chi_hat_expansion(b3, xi).with_conjugate.real()) * mol.fourier(eps * r);
      }
      return t * t * t * s;
    };
    std::vector<double> env;
    for (double lo : {4.0, 8.0, 16.0}) {
      double m = 0.0;
      for (int i = 0; i < 8; ++i) m = std::max(m, std::abs(err(lo * std::exp2(i / 8.0))));
      env.push_back(m);
    }
    const double mn = *std::min_element(env.begin(), env.end()), mx = *std::max_element(env.begin(), env.end());
    CHECK(mn > 0.0);
    CHECK(mx / mn < 4.0);
  }
}

TEST_CASE("rho hat envelope") {
  const Mollifier m(2, 0.5);
  double prev = INFINITY;
  for (double w = 0.0; w < 200.0; w += 0.37) {
    const double e = rho_hat_envelope(m, w);
    CHECK(e <= prev);
    // past the table's 160 the transform sits on its rounding floor
    if (w <= 160.0) CHECK(e >= std::abs(m.fourier(w)));
    else CHECK(std::abs(m.fourier(w)) <= 1e-15);
    prev = e;
  }
  CHECK(rho_hat_envelope(m, 170.0) == 0.0);
}
