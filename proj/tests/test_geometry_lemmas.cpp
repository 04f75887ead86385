#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "latrem/errors.hpp"
#include "latrem/geometry_lemmas.hpp"
#include "oracles.hpp"

using namespace latrem;

namespace {

std::span<const double> sp(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// Adjugate of a 2x2 or 3x3 integer matrix from cofactors.
IMat adjugate(const IMat& v) {
  const auto n = v.rows();
  IMat a(n, n);
  if (n == 2) {
    a << v(1, 1), -v(0, 1), -v(1, 0), v(0, 0);
    return a;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      a(i, j) = v(r0, c0) * v(r1, c1) - v(r0, c1) * v(r1, c0);
    }
  return a;
}

std::int64_t det_small(const IMat& v) {
  if (v.rows() == 2) return v(0, 0) * v(1, 1) - v(0, 1) * v(1, 0);
  return (adjugate(v).row(0) * v.col(0))(0);
}

// k and b lie in the same coset of V Z^d iff adj(V)(k - b) = 0 mod det V.
bool same_coset(const IMat& adj, std::int64_t det, const IVec& k, const IVec& b) {
  const IVec t = adj * (k - b);
  for (Eigen::Index i = 0; i < t.size(); ++i)
    if (t(i) % det != 0) return false;
  return true;
}

void check_cover(const IMat& V, int B) {
  const int d = static_cast<int>(V.rows());
  const CosetDecomposition cd = coset_decomposition(V);
  const std::int64_t det = det_small(V);
  REQUIRE(det != 0);
  CHECK(static_cast<std::int64_t>(cd.reps.size()) == std::abs(det));
  const IMat adj = adjugate(V);
  for (std::size_t a = 0; a < cd.reps.size(); ++a)
    for (std::size_t b = a + 1; b < cd.reps.size(); ++b) CHECK_FALSE(same_coset(adj, det, cd.reps[a], cd.reps[b]));
  IVec k = IVec::Constant(d, -B);
  while (true) {
    int hits = 0;
    std::size_t which = 0;
    for (std::size_t l = 0; l < cd.reps.size(); ++l)
      if (same_coset(adj, det, k, cd.reps[l])) {
        ++hits;
        which = l;
      }
    CHECK(hits == 1);
    CHECK(cd.coset_of(k) == static_cast<std::int64_t>(which));
    int a = d - 1;
    while (a >= 0 && k(a) == B) {
      k(a) = -B;
      --a;
    }
    if (a < 0) break;
    ++k(a);
  }
}

// d^3 F / du_a du_b du_c at 0 for F(u) = H(y + sum u_l v_l), composed central
// differences with one Richardson step.
double fd_third(const ConvexBody& body, const Vec& y, const Mat& v, int a, int b, int c) {
  auto at = [&](double h) {
    double s = 0.0;
    for (int sa : {-1, 1})
      for (int sb : {-1, 1})
        for (int sc : {-1, 1}) {
          const Vec x = y + h * (sa * v.col(a) + sb * v.col(b) + sc * v.col(c));
          s += sa * sb * sc * body.support(sp(x));
        }
    return s / (8.0 * h * h * h);
  };
  const double h = 4e-3;
  return (4.0 * at(h / 2) - at(h)) / 3.0;
}

FrameOptions loose() {
  FrameOptions o;
  o.enforce_threshold = false;
  return o;
}

}  // namespace

TEST_CASE("frame construction for the unit ball") {
  const ConvexBody ball = ConvexBody::ball(3);
  const Vec xi = Vec::Unit(3, 0);
  std::vector<double> det_ratio;
  for (std::int64_t N : {16, 32, 64}) {
    const FrameResult fr = build_frame(ball, sp(xi), 1, N, loose());
    const FrameConstruction& c = fr.construction;
    CHECK((c.A - c.A.transpose()).norm() <= 1e-12);
    CHECK(c.A.row(0).norm() <= 1e-8);
    CHECK(c.A.col(0).norm() <= 1e-8);
    CHECK(c.w_prime.row(0).norm() <= 1e-8);
    CHECK(std::abs(c.W.determinant() - 1.0) <= 1e-12);
    CHECK(c.alpha > 1.0);
    const Mat vss = fr.frame.V.cast<double>() / static_cast<double>(N);
    for (int l = 0; l < 3; ++l) {
      CHECK((vss.col(l) - c.v_star.col(l)).norm() <= std::sqrt(3.0) / N + 1e-12);
      const double len = fr.frame.V.col(l).cast<double>().norm() / N;
      CHECK(len > 0.1);
      CHECK(len < 10.0);
    }
    CHECK(fr.frame.det_v == det_small(fr.frame.V));
    CHECK(fr.frame.L == std::abs(fr.frame.det_v));
    REQUIRE(fr.frame.L > 0);
    det_ratio.push_back(static_cast<double>(fr.frame.L) / std::pow(static_cast<double>(N), 3.0));
  }
  const auto [lo, hi] = std::minmax_element(det_ratio.begin(), det_ratio.end());
  CHECK(*hi / *lo < 4.0);
}

TEST_CASE("frame construction is deterministic") {
  std::mt19937_64 rng(51);
  const ConvexBody e = ConvexBody::ellipsoid(oracle::random_spd(3, rng));
  const Vec xi = (Vec(3) << 0.3, -0.8, 0.5).finished();
  const FrameResult a = build_frame(e, sp(xi), 2, 32, loose());
  const FrameResult b = build_frame(e, sp(xi), 2, 32, loose());
  CHECK(a.frame.V == b.frame.V);
  CHECK(a.construction.alpha == b.construction.alpha);
}

TEST_CASE("g matrix symmetry, scaling and finite-difference oracle") {
  const ConvexBody ball = ConvexBody::ball(3);
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  const Vec y = (Vec(3) << 1.0, 0.2, -0.1).finished();
  Mat v = Mat::Identity(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v(i, j) += u(rng);
  const GMatrix g = g_matrix(ball, sp(y), v, 1);
  CHECK((g.g - g.g.transpose()).norm() <= 1e-12 * g.g.norm());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double o = fd_third(ball, y, v, 0, i, j);
      CHECK(std::abs(g.g(i, j) - o) <= 1e-6 * std::max(1.0, std::abs(o)));
    }
  const ConvexBody e = ConvexBody::ellipsoid(oracle::random_spd(3, rng));
  for (int k = 1; k <= 3; ++k) {
    const GMatrix a = g_matrix(e, sp(y), v, k);
    const GMatrix b = g_matrix(e, sp(y), Mat(2.0 * v), k);
    CHECK((b.g - std::pow(2.0, k + 2) * a.g).norm() <= 1e-10 * b.g.norm());
    const GMatrix c = g_matrix(e, sp(y), Mat(16.0 * v), k);
    CHECK((c.g - std::pow(16.0, k + 2) * a.g).norm() <= 1e-10 * c.g.norm());
  }
}

TEST_CASE("size pattern across N doubling") {
  std::mt19937_64 rng(53);
  const ConvexBody e = ConvexBody::ellipsoid(oracle::random_spd(3, rng, 0.7, 1.5));
  const Vec xi = (Vec(3) << 0.6, 0.5, -0.7).finished();
  for (int k = 1; k <= 2; ++k) {
    std::vector<PatternReport> reps;
    std::vector<double> frozen;
    for (std::int64_t N : {32, 64, 128}) {
      const FrameResult fr = build_frame(e, sp(xi), 2, N, loose());
      reps.push_back(verify_size_pattern(e, fr, sp(xi), k));
      CHECK(reps.back().passed);
      const Mat vss = fr.frame.V.cast<double>() / static_cast<double>(N);
      const GMatrix g = g_matrix(e, sp(xi), vss, k);
      double m = 0.0;
      for (int j = 1; j < 3; ++j) m = std::max(m, std::abs(g.g(2, j)));
      frozen.push_back(N * m);
    }
    auto stable = [](double a, double b, double c) {
      a = std::abs(a);
      b = std::abs(b);
      c = std::abs(c);
      const double lo = std::min({a, b, c}), hi = std::max({a, b, c});
      return lo > 0.0 && hi / lo < 4.0;
    };
    CHECK(stable(reps[0].h_ratio, reps[1].h_ratio, reps[2].h_ratio));
    CHECK(stable(reps[0].corner_ratio, reps[1].corner_ratio, reps[2].corner_ratio));
    for (std::size_t i = 0; i < reps[0].diag_ratio.size(); ++i)
      CHECK(stable(reps[0].diag_ratio[i], reps[1].diag_ratio[i], reps[2].diag_ratio[i]));
    // N max_j |g_{d,j}| / N^{k+2} bounded: the raw ratio shrinks like 1/N
    CHECK(reps[2].last_row_scaled <= 4.0 * std::max(reps[0].last_row_scaled, 1e-3));
    CHECK(*std::max_element(frozen.begin(), frozen.end()) <= 4.0 * std::max(frozen[0], 1e-3));
  }
}

TEST_CASE("coset decompositions") {
  CosetDecomposition c = coset_decomposition(IMat(2 * IMat::Identity(2, 2)));
  REQUIRE(c.reps.size() == 4);
  std::set<std::pair<std::int64_t, std::int64_t>> got, want{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  for (const auto& b : c.reps) got.insert({((b(0) % 2) + 2) % 2, ((b(1) % 2) + 2) % 2});
  CHECK(got == want);
  c = coset_decomposition(IMat(IMat::Identity(3, 3)));
  REQUIRE(c.reps.size() == 1);
  CHECK(c.reps[0].isZero());
  CHECK_THROWS(coset_decomposition(IMat(IMat::Zero(2, 2))));
  check_cover(IMat(2 * IMat::Identity(2, 2)), 6);

  std::mt19937_64 rng(54);
  std::uniform_int_distribution<int> ui(-2, 2), dg(1, 4);
  for (int n = 0; n < 3; ++n) {
    IMat U = IMat::Identity(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) U(i, j) = ui(rng);
    IMat L = IMat::Identity(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < i; ++j) L(i, j) = ui(rng);
    IMat D = IMat::Zero(3, 3);
    for (int i = 0; i < 3; ++i) D(i, i) = dg(rng);
    check_cover(IMat(L * U * D), 6);
  }
}

TEST_CASE("coset cover for constructed frames") {
  std::mt19937_64 rng(55);
  std::normal_distribution<double> g;
  for (int n = 0; n < 10; ++n) {
    const int d = 2 + n % 2;
    const ConvexBody e = ConvexBody::ellipsoid(oracle::random_spd(d, rng, 0.7, 1.5));
    Vec xi(d);
    for (int i = 0; i < d; ++i) xi(i) = g(rng);
    xi *= (0.6 + 0.1 * n) / xi.norm();
    const FrameResult fr = build_frame(e, sp(xi), 1, 2, loose());
    if (fr.frame.L > 400) continue;
    check_cover(fr.frame.V, 6);
  }
}

TEST_CASE("inverse function radii") {
  const InverseFnRadii r = inverse_fn_radii(1.0, 1.0, 2, 1.0);
  CHECK(r.r1 == doctest::Approx(std::pow(2.0, -4.5)).epsilon(1e-14));
  CHECK(r.r2 == doctest::Approx(std::pow(2.0, -4.5) / (4.0 * std::pow(2.0, 1.5))).epsilon(1e-14));
  CHECK(r.r2 == doctest::Approx(0.00390625).epsilon(1e-12));
  CHECK(inverse_fn_radii(1.0, 1.0, 2, 1e-4).r1 == 1e-4);
  const InverseFnRadii h = r.rescaled(r.r1 / 2);
  CHECK(h.r2 == doctest::Approx(r.r2 / 2).epsilon(1e-14));
  // second path: products accumulated term by term in long double
  for (int d = 1; d <= 6; ++d)
    for (double C : {1.0, 1.5, 3.0})
      for (double c : {0.1, 1.0})
        for (double r0 : {1e-3, 1.0}) {
          if (c > std::pow(C, d)) continue;
          long double fact = 1.0L, cd = 1.0L, cd1 = 1.0L;
          for (int i = 1; i < d; ++i) fact *= i;
          for (int i = 0; i < d; ++i) cd *= C;
          for (int i = 0; i < d - 1; ++i) cd1 *= C;
          const long double d72 = std::pow(static_cast<long double>(d), 3.5L), d32 = std::pow(static_cast<long double>(d), 1.5L);
          const long double r1 = std::min<long double>(c / (2.0L * d72 * fact * cd), r0);
          const long double r2 = c * r1 / (4.0L * d32 * fact * cd1);
          const InverseFnRadii x = inverse_fn_radii(c, C, d, r0);
          CHECK(x.r1 == doctest::Approx(static_cast<double>(r1)).epsilon(1e-13));
          CHECK(x.r2 == doctest::Approx(static_cast<double>(r2)).epsilon(1e-13));
          CHECK(x.r2 < x.r1);
        }
}

TEST_CASE("bijectivity on the inverse-function ball") {
  const Vec a = Vec::Zero(2);
  const InverseFnRadii r = inverse_fn_radii(1.0, 1.0, 2, 1.0);
  const BijectivityReport id = verify_bijectivity([](const Vec& x) { return x; },
                                                  [](const Vec& x) { return Mat(Mat::Identity(x.size(), x.size())); }, a, r);
  CHECK(id.passed);
  CHECK(id.max_iterations <= 1);
  auto f = [](const Vec& x) { return Vec(x + 0.1 * x.array().sin().matrix()); };
  auto df = [](const Vec& x) { return Mat(Mat::Identity(2, 2) + Mat(0.1 * x.array().cos().matrix().asDiagonal())); };
  const InverseFnRadii r2 = inverse_fn_radii(1.0, 1.1, 2, 1.0);
  const BijectivityReport s = verify_bijectivity(f, df, a, r2, 1000);
  CHECK(s.passed);
  CHECK(s.solved == s.samples);
  CHECK(s.samples >= 1000);
  CHECK(s.collisions == 0);
  CHECK(s.worst_radius <= 1.0);
  auto sing = [](const Vec& x) { return Mat(Mat::Zero(x.size(), x.size())); };
  CHECK_THROWS_AS(verify_bijectivity(f, sing, a, r2), HypothesisError);
}
