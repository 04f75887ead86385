#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <numeric>
#include <random>

#include "latrem/errors.hpp"
#include "latrem/exp_sum.hpp"
#include "oracles.hpp"
#include "sum_instances.hpp"

using namespace latrem;

using namespace sums;


TEST_CASE("eval_sum against long double reference") {
  Instance in;
  in.c = Vec::Constant(1, 0.5);
  in.R = 0.25;
  in.A = Mat::Identity(1, 1);
  in.b = Vec::Zero(1);
  in.a = Vec::Zero(1);
  SumSpec s;
  s.M = 64;
  s.T = 200;
  const auto ref = reference_sum(s, in);
  const Complex v = eval_sum(s, in.pair());
  CHECK(std::abs(v - Complex(static_cast<double>(ref.real()), static_cast<double>(ref.imag()))) <= 1e-10);
  std::mt19937_64 rng(31);
  for (int n = 0; n < 10; ++n) {
    const int d = 1 + n % 3;
    const Instance r = random_instance(d, rng);
    SumSpec t;
    t.M = 24;
    t.delta = 1.0;
    t.T = 57.0;
    const auto rr = reference_sum(t, r);
    const double scale = sum_g(t, r);
    CHECK(std::abs(eval_sum(t, r.pair()) - Complex(static_cast<double>(rr.real()), static_cast<double>(rr.imag()))) <=
          1e-12 * scale);
  }
}

TEST_CASE("zero phase and T = 0") {
  std::mt19937_64 rng(32);
  const Instance in = random_instance(2, rng);
  PhasePair zero = in.pair();
  zero.F = [](std::span<const double>) { return 0.0; };
  SumSpec s;
  s.M = 20;
  s.T = 37.0;
  const Complex a = eval_sum(s, zero);
  const double g = sum_g(s, in);
  CHECK(std::abs(a.imag()) <= 1e-12 * g);
  CHECK(a.real() == doctest::Approx(g).epsilon(1e-13));
  s.T = 0.0;
  CHECK(std::abs(eval_sum(s, in.pair()) - a) <= 1e-12 * g);
}

TEST_CASE("Weyl difference identity on random instances") {
  std::mt19937_64 rng(33);
  for (int n = 0; n < 50; ++n) {
    const int d = 1 + n % 2;
    const Instance in = random_instance(d, rng);
    SumSpec s;
    s.M = 12 + n % 5;
    s.T = 5.0 + 3.0 * n;
    IVec r = IVec::Zero(d);
    r(n % d) = 1 + n % 2;
    const WeylIdentity w = weyl_difference_identity(s, in.pair(), r);
    CHECK(std::abs(w.lhs - w.rhs) <= 1e-10 * (1.0 + w.lhs));
    CHECK(std::abs(w.line_lhs - w.line_rhs) <= 1e-10 * (1.0 + w.line_lhs));
    const auto ref = reference_sum(s, in);
    CHECK(w.lhs == doctest::Approx(static_cast<double>(std::norm(ref))).epsilon(1e-10));
  }
}

TEST_CASE("Weyl identity degenerate cases") {
  Instance in;
  in.c = Vec::Constant(1, 0.5);
  in.R = 0.05;
  in.A = Mat::Identity(1, 1);
  in.b = Vec::Zero(1);
  in.a = Vec::Zero(1);
  SumSpec s;
  s.M = 16;
  s.T = 3.3;
  const WeylIdentity w = weyl_difference_identity(s, in.pair(), IVec::Ones(1));
  CHECK(w.lhs == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(w.rhs == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  std::mt19937_64 rng(34);
  const Instance r = random_instance(2, rng);
  PhasePair zero = r.pair();
  zero.F = [](std::span<const double>) { return 0.0; };
  s.M = 20;
  const double g = sum_g(s, r);
  const WeylIdentity z = weyl_difference_identity(s, zero, IVec::Unit(2, 0));
  CHECK(z.lhs == doctest::Approx(g * g).epsilon(1e-12));
  CHECK(z.rhs == doctest::Approx(g * g).epsilon(1e-10));
}

TEST_CASE("A-process phases against the integral representation") {
  std::mt19937_64 rng(35);
  std::vector<double> gx, gw;
  oracle::gauss_legendre(16, gx, gw);
  for (int n = 0; n < 12; ++n) {
    const int d = 1 + n % 3;
    const int q = d == 1 ? 1 : 1 + n % 2;
    const Instance in = random_instance(d, rng);
    SumSpec s;
    s.M = 32;
    s.delta = 0.75;
    s.T = 10;
    std::vector<IVec> shifts;
    for (int l = 0; l < q; ++l) shifts.push_back(IVec::Unit(d, l == 0 ? 0 : d - 1));
    const TransformedSum ts = a_process(s, in.pair(), q, shifts, 6.0);
    REQUIRE(!ts.tuples.empty());
    const double D = s.delta * s.M;
    for (std::size_t k = 0; k < ts.tuples.size(); k += 2) {
      const auto& h = ts.tuples[k];
      const DifferencedPair dp = ts.differenced(h);
      for (int p = 0; p < 5; ++p) {
        Vec x = in.c;
        for (int i = 0; i < d; ++i) x(i) += 0.1 * std::uniform_real_distribution<double>(-1, 1)(rng);
        const Vec r1 = shifts[0].cast<double>() * static_cast<double>(h[0]) / D;
        double oracle = 0.0;
        if (q == 1) {
          for (std::size_t i = 0; i < gx.size(); ++i)
            oracle += 0.5 * gw[i] * in.d1(shifts[0].cast<double>(), Vec(x + 0.5 * (gx[i] + 1.0) * r1));
        } else {
          const Vec r2 = shifts[1].cast<double>() * static_cast<double>(h[1]) / D;
          for (std::size_t i = 0; i < gx.size(); ++i)
            for (std::size_t j = 0; j < gx.size(); ++j)
              oracle += 0.25 * gw[i] * gw[j] *
                        in.d2(shifts[0].cast<double>(), shifts[1].cast<double>(),
                              Vec(x + 0.5 * (gx[i] + 1.0) * r1 + 0.5 * (gx[j] + 1.0) * r2));
        }
        const double fq = dp.pair.F({x.data(), static_cast<std::size_t>(d)});
        CHECK(std::abs(fq - oracle) <= 1e-8 * std::max(1.0, std::abs(oracle)));
      }
    }
  }
}

TEST_CASE("A-process of a linear phase is constant") {
  Instance in;
  in.c = Vec::Zero(2);
  in.R = 0.3;
  in.A = Mat::Zero(2, 2);
  in.b = (Vec(2) << 0.7, -1.1).finished();
  in.a = Vec::Zero(2);
  SumSpec s;
  s.M = 16;
  const TransformedSum ts = a_process(s, in.pair(), 1, {IVec::Unit(2, 1)}, 4.0);
  for (const auto& h : ts.tuples) {
    const DifferencedPair dp = ts.differenced(h);
    for (double t : {-0.1, 0.0, 0.13}) {
      const std::vector<double> x{t, -t};
      CHECK(dp.pair.F(x) == doctest::Approx(-1.1).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(a_process(s, in.pair(), 1, {IVec::Unit(2, 1)}, 1.0), ParameterError);
  CHECK_THROWS_AS(a_process(s, in.pair(), 1, {IVec::Unit(2, 1)}, 17.0), ParameterError);
}

TEST_CASE("differenced supports keep the margin") {
  std::mt19937_64 rng(36);
  for (int n = 0; n < 4; ++n) {
    const Instance in = random_instance(2, rng);
    const PhasePair base = in.pair();
    SumSpec s;
    s.M = 16;
    const TransformedSum ts = a_process(s, base, 2, {IVec::Unit(2, 0), IVec::Unit(2, 1)}, 5.0);
    for (const auto& h : ts.tuples) {
      const PhasePair p = ts.differenced(h).pair;
      const auto box = base.omega.bounding_box();
      for (int i = 0; i <= 60; ++i)
        for (int j = 0; j <= 60; ++j) {
          const std::vector<double> x{box[0].first + (box[0].second - box[0].first) * i / 60.0,
                                      box[1].first + (box[1].second - box[1].first) * j / 60.0};
          if (p.G(x) != 0.0) CHECK(p.omega.depth(x) >= base.margin - 1e-12);
          if (p.omega.contains(x)) CHECK(base.omega.contains(x));
        }
    }
  }
}

TEST_CASE("Weyl inequality ratios") {
  std::mt19937_64 rng(37);
  double worst16 = 0.0, worst32 = 0.0;
  for (int n = 0; n < 30; ++n) {
    const Instance in = random_instance(2, rng);
    for (double M : {16.0, 32.0}) {
      SumSpec s;
      s.M = M;
      s.T = 40.0;
      const WeylInequality w = verify_weyl_inequality(s, in.pair(), 1, {IVec::Unit(2, 0)}, M / 4);
      CHECK(std::isfinite(w.ratio));
      (M == 16.0 ? worst16 : worst32) = std::max(M == 16.0 ? worst16 : worst32, w.ratio);
    }
  }
  CHECK(worst16 > 0.0);
  CHECK(worst32 <= 4.0 * worst16);
  const Instance in = random_instance(2, rng);
  SumSpec s;
  s.M = 16;
  s.T = 25.0;
  const WeylInequality full = verify_weyl_inequality(s, in.pair(), 1, {IVec::Unit(2, 0)}, 16.0);
  CHECK(full.rhs >= std::pow(16.0, 3.0));
  PhasePair zero = in.pair();
  zero.F = [](std::span<const double>) { return 0.0; };
  const WeylInequality z = verify_weyl_inequality(s, zero, 1, {IVec::Unit(2, 0)}, 4.0);
  CHECK(z.lhs == doctest::Approx(std::pow(sum_g(s, in), 2.0)).epsilon(1e-10));
  CHECK(z.ratio <= 4.0);
}

TEST_CASE("Poisson dual converges to the direct sum") {
  Instance in;
  in.c = Vec::Constant(1, 0.5);
  in.R = 0.25;
  in.A = Mat::Identity(1, 1);
  in.b = Vec::Zero(1);
  in.a = Vec::Zero(1);
  SumSpec s;
  s.M = 32;
  s.T = 100;
  const PhasePair p = in.pair();
  const Complex direct = eval_sum(s, p);
  double prev = INFINITY;
  for (double r : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    const double e = std::abs(poisson_dual(s, p, r) - direct);
    CHECK(e <= prev + 1e-12);
    prev = e;
  }
  CHECK(prev <= 1e-6);
  PhasePair zero = p;
  zero.F = [](std::span<const double>) { return 0.0; };
  CHECK(std::abs(poisson_dual(s, zero, 8.0) - Complex(sum_g(s, in), 0.0)) <= 1e-9);
}

TEST_CASE("B-process ratio stays bounded") {
  Instance in;
  in.c = Vec::Zero(2);
  in.R = 0.4;
  in.A = Mat::Identity(2, 2);
  in.b = Vec::Zero(2);
  in.a = Vec::Zero(2);
  SumSpec s;
  s.M = 64;
  std::vector<double> lx, ly;
  for (int i = 0; i <= 30; ++i) {
    s.T = 10.0 * std::pow(1000.0, i / 30.0);
    lx.push_back(std::log(s.T));
    ly.push_back(std::log(b_process_ratio(s, in.pair())));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  // Bounded means not growing: the ratio falls off once T passes M, so only
  // the upper side of the slope is constrained.
  CHECK(sxy / sxx <= 0.1);
  CHECK(*std::max_element(ly.begin() + 15, ly.end()) <= *std::max_element(ly.begin(), ly.begin() + 15));
  s.T = 0.5;
  CHECK(b_process_ratio(s, in.pair()) <= 1.0);
  Instance flat = in;
  flat.A(1, 1) = 0.0;
  s.T = 10.0;
  CHECK_THROWS_AS(b_process_ratio(s, flat.pair()), HypothesisError);
}

TEST_CASE("theorem exponents") {
  const TheoremExponents a = theorem_exponents(3, 1);
  CHECK(a.w == Rational(3, 10));
  CHECK(a.aqb_M == Rational(3) - Rational(3) * a.w);
  CHECK(theorem_exponents(4, 1).abab_T == Rational(2, 7));
  CHECK_THROWS_AS(theorem_exponents(3, 3), DomainError);
  CHECK_THROWS_AS(theorem_exponents(2, 1), DomainError);
  for (int d = 3; d <= 8; ++d)
    for (int q = 1; q <= (d == 3 ? 2 : 4); ++q) {
      const TheoremExponents e = theorem_exponents(d, q);
      const std::int64_t Q = std::int64_t{1} << q;
      CHECK(e.w == Rational(d, 2 * d * (Q - 1) + 2 * Q));
      const std::int64_t den = 2 * (Q - 1) * d * d + 2 * Q * d + 4 * Q;
      CHECK(e.abab_T == Rational(d * d, den));
      CHECK(e.abab_M == Rational(d) - Rational((q + 2) * d * d + d, den));
      CHECK(e.restriction_lo < e.restriction_hi);
    }
}

TEST_CASE("delta threshold scan") {
  Instance in;
  in.c = Vec::Zero(3);
  in.R = 0.3;
  in.A = Mat::Identity(3, 3);
  in.b = Vec::Zero(3);
  in.a = Vec::Zero(3);
  PhasePair p = in.pair();
  // x_1 |x|^2 / 2: the Hessian of its e_1 derivative is I + 2 e_1 e_1^T.
  p.F = [](std::span<const double> x) { return 0.5 * x[0] * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); };
  const std::vector<double> deltas{1.0, 0.5, 0.25};
  const DeltaScan sc = delta_threshold_scan(p, 1, 64, deltas);
  CHECK(sc.rows.size() == deltas.size());
  CHECK(sc.reference > 0.0);
  for (const auto& r : sc.rows) CHECK(std::isfinite(r.min_det));
}
