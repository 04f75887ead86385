#include "latrem/geometry_lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>

#include "latrem/errors.hpp"

namespace latrem {

namespace {

std::span<const double> span_of(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// Orthonormal frame whose first column is u, from the Householder
// reflection that maps e_1 to u.
Mat householder_completion(const Vec& u) {
  const int d = static_cast<int>(u.size());
  Vec v = -u;
  v(0) += 1.0;
  const double vv = v.squaredNorm();
  if (vv < 1e-28) return Mat::Identity(d, d);
  return Mat::Identity(d, d) - 2.0 * v * v.transpose() / vv;
}

// Flip so that the first entry with |x| > 1e-12 is positive.
void fix_sign(Eigen::Ref<Vec> x) {
  for (int i = 0; i < x.size(); ++i) {
    if (std::abs(x(i)) > 1e-12) {
      if (x(i) < 0) x = -x;
      return;
    }
  }
}

double subdeterminant(const Mat& g) {
  const int d = static_cast<int>(g.rows());
  if (d <= 2) return 1.0;
  return g.block(1, 1, d - 2, d - 2).determinant();
}

}  // namespace

GMatrix g_matrix(const ConvexBody& body, std::span<const double> y, const Mat& v, int k) {
  const int d = body.dimension();
  if (k < 1 || k > 3) throw DomainError("g_matrix supports 1 <= k <= 3");
  if (v.rows() != d || v.cols() != d) throw DomainError("g_matrix: direction matrix must be d x d");
  const Jet jet = body.support_jet(y, k + 2).compose_linear(v);
  GMatrix gm;
  gm.k = k;
  gm.g = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      MultiIndex nu(d, 0);
      nu[0] += 1;
      nu[i] += 1;
      nu[j] += 1;
      nu[d - 1] += k - 1;
      gm.g(i, j) = gm.g(j, i) = jet.derivative(nu);
    }
  }
  gm.h = gm.g.determinant();
  return gm;
}

GMatrix g_matrix(const ConvexBody& body, std::span<const double> y, const IntegerFrame& frame, int k) {
  return g_matrix(body, y, frame.V.cast<double>(), k);
}

FrameResult build_frame(const ConvexBody& body, std::span<const double> xi, int q, std::int64_t N,
                        const FrameOptions& opt) {
  const int d = body.dimension();
  if (d < 2) throw DomainError("build_frame requires d >= 2");
  if (static_cast<int>(xi.size()) != d) throw DomainError("build_frame: direction has wrong dimension");
  if (q < 1 || q > 3) throw DomainError("build_frame supports 1 <= q <= 3");
  if (N < 1) throw DomainError("build_frame requires N >= 1");
  FrameResult out;
  FrameConstruction& fc = out.construction;
  fc.xi = Eigen::Map<const Vec>(xi.data(), d);
  const double r = fc.xi.norm();
  if (r < 0.5 - 1e-12 || r > 2.0 + 1e-12) throw DomainError("build_frame: xi must satisfy 1/2 <= |xi| <= 2");

  fc.P = r * householder_completion(fc.xi / r);
  fc.A = fc.P.transpose() * body.support_hessian(xi) * fc.P;
  fc.A = 0.5 * (fc.A + fc.A.transpose());

  Eigen::SelfAdjointEigenSolver<Mat> es(fc.A.block(1, 1, d - 1, d - 1));
  fc.lambda = es.eigenvalues();
  Mat e = es.eigenvectors();
  for (int i = 0; i < d - 1; ++i) fix_sign(e.col(i));
  // det W = (-1)^{d-1} det E; orient the last eigenvector so that det W = 1.
  if ((d % 2 == 0 ? -1.0 : 1.0) * e.determinant() < 0) e.col(d - 2) *= -1.0;
  fc.w_prime = Mat::Zero(d, d - 1);
  fc.w_prime.block(1, 0, d - 1, d - 1) = e;

  auto assemble = [&](double alpha) {
    fc.alpha = alpha;
    fc.W = Mat::Zero(d, d);
    for (int i = 0; i < d - 1; ++i) fc.W.col(i) = fc.w_prime.col(i);
    fc.W(0, 0) += alpha;
    fc.W(0, d - 1) = 1.0;
    fc.v_star = fc.P * fc.W;
  };

  // Double alpha until the (2..d-1) minor of b^{(k)}(alpha) reaches half the
  // size of its leading term alpha^{d-2} prod k! lambda_j, for every k <= q.
  double alpha = opt.alpha_start;
  for (;; alpha *= 2.0) {
    if (alpha > 1e6) throw NumericError("build_frame: no admissible alpha below 1e6");
    assemble(alpha);
    bool ok = true;
    for (int k = 1; k <= q && ok; ++k) {
      const GMatrix b = g_matrix(body, xi, fc.v_star, k);
      double lead = 1.0;
      for (int j = 1; j <= d - 2; ++j) lead *= alpha * factorial(k) * std::abs(fc.lambda(j));
      if (!(std::abs(subdeterminant(b.g)) >= 0.5 * lead)) ok = false;
    }
    if (ok) break;
  }

  IntegerFrame& fr = out.frame;
  fr.N = N;
  fr.V = IMat(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) fr.V(i, j) = static_cast<std::int64_t>(std::llround(static_cast<double>(N) * fc.v_star(i, j)));
  fr.det_v = integer_determinant(fr.V);
  fr.L = fr.det_v < 0 ? -fr.det_v : fr.det_v;
  if (fr.L == 0) throw ThresholdError("build_frame: integer frame is singular; N is too small");

  if (opt.enforce_threshold && !frame_pattern_holds(body, out, q)) {
    std::ostringstream msg;
    msg << "build_frame: size pattern fails at N=" << N << " (alpha=" << fc.alpha << ")";
    for (int k = 1; k <= q; ++k) {
      const PatternReport rep = verify_size_pattern(body, out, xi, k);
      if (!rep.passed) msg << "; k=" << k << ": " << rep.failure;
    }
    throw ThresholdError(msg.str());
  }
  return out;
}

PatternReport verify_size_pattern(const ConvexBody& body, const FrameResult& fr, std::span<const double> y, int k) {
  const int d = body.dimension();
  const double n = static_cast<double>(fr.frame.N);
  const GMatrix gm = g_matrix(body, y, fr.frame, k);
  const GMatrix ref = g_matrix(body, span_of(fr.construction.xi), fr.construction.v_star, k);
  const Mat ratio = gm.g / std::pow(n, k + 2);

  PatternReport rep;
  rep.k = k;
  rep.N = fr.frame.N;
  rep.h_ratio = std::abs(ratio.determinant());
  rep.h_reference = std::abs(ref.h);
  rep.deviation = (ratio - ref.g).norm();
  const double scale = std::max(1.0, ref.g.cwiseAbs().maxCoeff());
  auto fail = [&](const std::string& what) {
    if (rep.failure.empty()) rep.failure = what;
  };
  auto comparable = [](double v, double r) { return std::abs(v) >= 0.5 * std::abs(r) && std::abs(v) <= 2.0 * std::abs(r); };

  for (int i = 0; i < d - 1; ++i) {
    rep.diag_ratio.push_back(ratio(i, i));
    if (!comparable(ratio(i, i), ref.g(i, i))) fail("diagonal g_{i,i} not comparable to N^{k+2}");
  }
  rep.corner_ratio = ratio(d - 1, 0);
  if (!comparable(ratio(d - 1, 0), ref.g(d - 1, 0))) fail("corner g_{d,1} not comparable to N^{k+2}");
  for (int i = 1; i < d - 1; ++i)
    for (int j = 0; j < i; ++j) rep.offdiag_max = std::max(rep.offdiag_max, std::abs(ratio(i, j)));
  if (rep.offdiag_max > 2.0 * scale) fail("off-diagonal g_{i,j} exceeds N^{k+2} bound");
  double last = 0.0;
  for (int j = 1; j < d; ++j) last = std::max(last, std::abs(ratio(d - 1, j)));
  rep.last_row_scaled = n * last;
  // Step 2 and Step 3 perturbations are O(sqrt(d)/N) per direction column.
  if (rep.last_row_scaled > 8.0 * (k + 3) * std::sqrt(static_cast<double>(d)) * scale)
    fail("last row g_{d,j} (j >= 2) exceeds N^{k+1} bound");
  if (rep.h_ratio < 0.5 * rep.h_reference) fail("determinant h_k below c N^{(k+2)d}");
  rep.passed = rep.failure.empty();
  return rep;
}

bool frame_pattern_holds(const ConvexBody& body, const FrameResult& fr, int q) {
  const int d = body.dimension();
  const Vec& xi = fr.construction.xi;
  std::vector<Vec> ys{xi};
  for (int l = 0; l < d; ++l)
    for (double s : {-1.0, 1.0}) {
      Vec y = xi;
      y(l) += s / (2.0 * static_cast<double>(fr.frame.N));
      ys.push_back(y);
    }
  for (int k = 1; k <= q; ++k)
    for (const Vec& y : ys)
      if (!verify_size_pattern(body, fr, span_of(y), k).passed) return false;
  return true;
}

std::int64_t find_a3(const ConvexBody& body, const std::vector<Vec>& xi_net, int q, std::int64_t n_min,
                     std::int64_t n_max) {
  std::int64_t n = 1;
  while (n < n_min) n *= 2;
  FrameOptions opt;
  opt.enforce_threshold = false;
  for (; n <= n_max; n *= 2) {
    bool ok = true;
    for (const Vec& xi : xi_net) {
      try {
        const FrameResult fr = build_frame(body, span_of(xi), q, n, opt);
        if (!frame_pattern_holds(body, fr, q)) ok = false;
      } catch (const ThresholdError&) {
        ok = false;
      }
      if (!ok) break;
    }
    if (ok) return n;
  }
  throw ThresholdError("find_a3: size pattern fails for every N up to n_max");
}

std::vector<Vec> direction_net(int d, int count) {
  if (d < 2 || count < 1) throw DomainError("direction_net requires d >= 2 and count >= 1");
  std::vector<Vec> net;
  if (d == 2) {
    for (int i = 0; i < count; ++i) {
      const double a = 2.0 * M_PI * (i + 0.5) / count;
      Vec v(2);
      v << std::cos(a), std::sin(a);
      net.push_back(v);
    }
  } else if (d == 3) {
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double s = std::sqrt(1.0 - z * z);
      Vec v(3);
      v << s * std::cos(golden * i), s * std::sin(golden * i), z;
      net.push_back(v);
    }
  } else {
    std::mt19937_64 rng(20240601ULL + d);
    std::normal_distribution<double> nd;
    for (int i = 0; i < count; ++i) {
      Vec v(d);
      for (int j = 0; j < d; ++j) v(j) = nd(rng);
      net.push_back(v / v.norm());
    }
  }
  return net;
}

std::int64_t CosetDecomposition::coset_of(const IVec& k) const {
  const IVec y = snf.U * k;
  std::int64_t idx = 0;
  for (int i = static_cast<int>(y.size()) - 1; i >= 0; --i) {
    const std::int64_t m = snf.D(i, i);
    std::int64_t c = y(i) % m;
    if (c < 0) c += m;
    idx = idx * m + c;
  }
  return idx;
}

CosetDecomposition coset_decomposition(const IMat& v) {
  if (v.rows() != v.cols()) throw DomainError("coset_decomposition requires a square matrix");
  const int d = static_cast<int>(v.rows());
  CosetDecomposition cd;
  cd.snf = smith_normal_form(v);
  std::int64_t L = 1;
  for (int i = 0; i < d; ++i) {
    if (cd.snf.D(i, i) == 0) throw DomainError("coset_decomposition: singular frame");
    L *= cd.snf.D(i, i);
    if (L > 100000000) throw ResourceError("coset_decomposition: index above 1e8 representatives");
  }
  cd.reps.reserve(static_cast<std::size_t>(L));
  IVec c = IVec::Zero(d);
  for (std::int64_t n = 0; n < L; ++n) {
    // Mixed-radix digits of n, least significant first.
    std::int64_t rem = n;
    for (int i = 0; i < d; ++i) {
      c(i) = rem % cd.snf.D(i, i);
      rem /= cd.snf.D(i, i);
    }
    cd.reps.push_back(cd.snf.U_inv * c);
  }
  return cd;
}

CosetDecomposition coset_decomposition(const IntegerFrame& frame) { return coset_decomposition(frame.V); }

double InverseFnRadii::ratio() const {
  return c / (4.0 * std::pow(d, 1.5) * factorial(d - 1) * std::pow(C, d - 1));
}

InverseFnRadii InverseFnRadii::rescaled(double r1_prime) const {
  if (!(r1_prime > 0.0) || r1_prime > r1) throw DomainError("rescaled radius must lie in (0, r1]");
  InverseFnRadii out = *this;
  out.r1 = r1_prime;
  out.r2 = ratio() * r1_prime;
  return out;
}

InverseFnRadii inverse_fn_radii(double c, double C, int d, double r0) {
  if (!(c > 0.0) || !(C > 0.0) || !(r0 > 0.0)) throw DomainError("inverse_fn_radii requires c, C, r0 > 0");
  if (d < 1) throw DomainError("inverse_fn_radii requires d >= 1");
  InverseFnRadii r;
  r.c = c;
  r.C = C;
  r.d = d;
  r.r0 = r0;
  r.r1 = std::min(c / (2.0 * std::pow(d, 3.5) * factorial(d - 1) * std::pow(C, d)), r0);
  r.r2 = r.ratio() * r.r1;
  return r;
}

BijectivityReport verify_bijectivity(const VecField& f, const JacobianField& df, const Vec& a,
                                     const InverseFnRadii& radii, int samples) {
  const int d = static_cast<int>(a.size());
  if (radii.d != d) throw DomainError("verify_bijectivity: radii computed for another dimension");
  const Mat j0 = df(a);
  if (!(std::abs(j0.determinant()) >= radii.c)) throw HypothesisError("verify_bijectivity: |det Df(a)| < c");
  const Vec b = f(a);

  auto newton = [&](const Vec& y, Vec x, int& iters) {
    for (iters = 0; iters < 50; ++iters) {
      const Vec res = f(x) - y;
      if (res.norm() <= 1e-13 * (1.0 + y.norm())) return std::optional<Vec>(x);
      x -= df(x).partialPivLu().solve(res);
      if (!x.allFinite()) break;
    }
    return std::optional<Vec>();
  };

  BijectivityReport rep;
  rep.samples = samples;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (int s = 0; s < samples; ++s) {
    Vec dir(d);
    for (int i = 0; i < d; ++i) dir(i) = nd(rng);
    dir /= dir.norm();
    // Uniform in the open ball B(b, r2).
    const Vec y = b + dir * radii.r2 * std::pow(ud(rng), 1.0 / d) * (1.0 - 1e-12);
    int iters = 0;
    const auto x = newton(y, a, iters);
    if (!x || (*x - a).norm() >= radii.r1) {
      if (rep.counterexample.empty()) {
        std::ostringstream msg;
        msg << "no preimage in B(a, r1) for sample " << s;
        rep.counterexample = msg.str();
      }
      continue;
    }
    ++rep.solved;
    rep.max_iterations = std::max(rep.max_iterations, iters);
    rep.worst_radius = std::max(rep.worst_radius, (*x - a).norm() / radii.r1);
    // Injectivity spot check from a second start inside B(a, r1).
    if (s % 10 == 0) {
      const Vec start = a + 0.5 * radii.r1 * dir;
      int it2 = 0;
      const auto x2 = newton(y, start, it2);
      if (x2 && (*x2 - a).norm() < radii.r1 && (*x2 - *x).norm() > 1e-9) ++rep.collisions;
    }
  }
  rep.passed = rep.solved == samples && rep.collisions == 0;
  return rep;
}

}  // namespace latrem
