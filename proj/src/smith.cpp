#include "latrem/smith.hpp"

#include <cstdlib>
#include <limits>
#include <utility>

#include "latrem/errors.hpp"

namespace latrem {

namespace {

std::int64_t checked(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw NumericError("integer overflow in lattice arithmetic");
  return static_cast<std::int64_t>(v);
}

// Floor division with remainder in [0, |b|).
std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

struct Reducer {
  IMat a, u, u_inv, w;
  int n, m;

  // row_i += c * row_j
  void add_row(int i, int j, std::int64_t c) {
    if (c == 0) return;
    for (int k = 0; k < m; ++k) a(i, k) = checked(static_cast<__int128>(a(i, k)) + static_cast<__int128>(c) * a(j, k));
    for (int k = 0; k < n; ++k) u(i, k) = checked(static_cast<__int128>(u(i, k)) + static_cast<__int128>(c) * u(j, k));
    for (int k = 0; k < n; ++k)
      u_inv(k, j) = checked(static_cast<__int128>(u_inv(k, j)) - static_cast<__int128>(c) * u_inv(k, i));
  }
  // col_i += c * col_j
  void add_col(int i, int j, std::int64_t c) {
    if (c == 0) return;
    for (int k = 0; k < n; ++k) a(k, i) = checked(static_cast<__int128>(a(k, i)) + static_cast<__int128>(c) * a(k, j));
    for (int k = 0; k < m; ++k) w(k, i) = checked(static_cast<__int128>(w(k, i)) + static_cast<__int128>(c) * w(k, j));
  }
  void swap_rows(int i, int j) {
    if (i == j) return;
    a.row(i).swap(a.row(j));
    u.row(i).swap(u.row(j));
    u_inv.col(i).swap(u_inv.col(j));
  }
  void swap_cols(int i, int j) {
    if (i == j) return;
    a.col(i).swap(a.col(j));
    w.col(i).swap(w.col(j));
  }
  void negate_row(int i) {
    a.row(i) *= -1;
    u.row(i) *= -1;
    u_inv.col(i) *= -1;
  }
};

}  // namespace

SmithForm smith_normal_form(const IMat& v) {
  Reducer r;
  r.n = static_cast<int>(v.rows());
  r.m = static_cast<int>(v.cols());
  r.a = v;
  r.u = IMat::Identity(r.n, r.n);
  r.u_inv = IMat::Identity(r.n, r.n);
  r.w = IMat::Identity(r.m, r.m);
  const int steps = std::min(r.n, r.m);
  for (int t = 0; t < steps; ++t) {
    while (true) {
      // Smallest nonzero entry of the trailing block becomes the pivot.
      int pi = -1, pj = -1;
      for (int i = t; i < r.n; ++i)
        for (int j = t; j < r.m; ++j)
          if (r.a(i, j) != 0 && (pi < 0 || std::llabs(r.a(i, j)) < std::llabs(r.a(pi, pj)))) {
            pi = i;
            pj = j;
          }
      if (pi < 0) break;
      r.swap_rows(t, pi);
      r.swap_cols(t, pj);
      bool clean = true;
      for (int i = t + 1; i < r.n; ++i) {
        r.add_row(i, t, -floor_div(r.a(i, t), r.a(t, t)));
        if (r.a(i, t) != 0) clean = false;
      }
      for (int j = t + 1; j < r.m; ++j) {
        r.add_col(j, t, -floor_div(r.a(t, j), r.a(t, t)));
        if (r.a(t, j) != 0) clean = false;
      }
      if (!clean) continue;
      // Enforce divisibility of the remaining block by the pivot.
      int bad = -1;
      for (int i = t + 1; i < r.n && bad < 0; ++i)
        for (int j = t + 1; j < r.m; ++j)
          if (r.a(i, j) % r.a(t, t) != 0) {
            bad = i;
            break;
          }
      if (bad < 0) break;
      r.add_row(t, bad, 1);
    }
    if (r.a(t, t) < 0) r.negate_row(t);
  }
  SmithForm s;
  s.U = r.u;
  s.W = r.w;
  s.D = r.a;
  s.U_inv = r.u_inv;
  return s;
}

std::int64_t integer_determinant(const IMat& v) {
  if (v.rows() != v.cols()) throw DomainError("determinant of a non-square matrix");
  const int n = static_cast<int>(v.rows());
  if (n == 0) return 1;
  IMat a = v;
  std::int64_t sign = 1, prev = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (a(k, k) == 0) {
      int p = k + 1;
      while (p < n && a(p, k) == 0) ++p;
      if (p == n) return 0;
      a.row(k).swap(a.row(p));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        a(i, j) = checked((static_cast<__int128>(a(i, j)) * a(k, k) - static_cast<__int128>(a(i, k)) * a(k, j)) / prev);
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

}  // namespace latrem
