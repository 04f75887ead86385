#include "latrem/jet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace latrem {

struct Jet::Table {
  int dim = 0;
  int order = 0;
  std::vector<MultiIndex> monomials;
  std::vector<int> degree;
  std::map<MultiIndex, std::size_t> index;
  // products[i] = list of (j, i+j) with deg(i) + deg(j) <= order.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> products;
};

namespace {

void enumerate_degree(int dim, int deg, int axis, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (axis == dim - 1) {
    cur[axis] = deg;
    out.push_back(cur);
    return;
  }
  for (int k = deg; k >= 0; --k) {
    cur[axis] = k;
    enumerate_degree(dim, deg - k, axis + 1, cur, out);
  }
}

std::shared_ptr<const Jet::Table> make_table(int dim, int order) {
  auto t = std::make_shared<Jet::Table>();
  t->dim = dim;
  t->order = order;
  for (int deg = 0; deg <= order; ++deg) {
    MultiIndex cur(dim, 0);
    std::vector<MultiIndex> level;
    enumerate_degree(dim, deg, 0, cur, level);
    for (auto& m : level) {
      t->index.emplace(m, t->monomials.size());
      t->monomials.push_back(m);
      t->degree.push_back(deg);
    }
  }
  const std::size_t n = t->monomials.size();
  t->products.resize(n);
  MultiIndex sum(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (t->degree[i] + t->degree[j] > order) continue;
      for (int a = 0; a < dim; ++a) sum[a] = t->monomials[i][a] + t->monomials[j][a];
      t->products[i].emplace_back(j, t->index.at(sum));
    }
  }
  return t;
}

std::shared_ptr<const Jet::Table> table_for(int dim, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const Jet::Table>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(dim, order);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto t = make_table(dim, order);
  cache.emplace(key, t);
  return t;
}

void check_compatible(const Jet& a, const Jet& b) {
  if (a.dim() != b.dim() || a.order() != b.order())
    throw std::invalid_argument("jet dimension/order mismatch");
}

double binomial_real(double r, int n) {
  double c = 1.0;
  for (int k = 0; k < n; ++k) c *= (r - k) / (k + 1);
  return c;
}

}  // namespace

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

double multi_factorial(const MultiIndex& nu) {
  double f = 1.0;
  for (int k : nu) f *= factorial(k);
  return f;
}

Jet::Jet(int dim, int order, double constant)
    : dim_(dim), order_(order), table_(table_for(dim, order)), coef_(table_->monomials.size(), 0.0) {
  if (dim < 1 || order < 0) throw std::invalid_argument("invalid jet shape");
  coef_[0] = constant;
}

Jet Jet::variable(int dim, int order, int axis, double value) {
  Jet j(dim, order, value);
  if (order >= 1) {
    MultiIndex nu(dim, 0);
    nu[axis] = 1;
    j.coef_[j.table_->index.at(nu)] = 1.0;
  }
  return j;
}

double Jet::coefficient(const MultiIndex& nu) const {
  auto it = table_->index.find(nu);
  if (it == table_->index.end()) throw std::out_of_range("multi-index beyond jet order");
  return coef_[it->second];
}

void Jet::set_coefficient(const MultiIndex& nu, double v) {
  auto it = table_->index.find(nu);
  if (it == table_->index.end()) throw std::out_of_range("multi-index beyond jet order");
  coef_[it->second] = v;
}

double Jet::derivative(const MultiIndex& nu) const { return coefficient(nu) * multi_factorial(nu); }

const MultiIndex& Jet::monomial(std::size_t idx) const { return table_->monomials[idx]; }

std::size_t Jet::index_of(const MultiIndex& nu) const { return table_->index.at(nu); }

Jet& Jet::operator+=(const Jet& o) {
  check_compatible(*this, o);
  for (std::size_t i = 0; i < coef_.size(); ++i) coef_[i] += o.coef_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_compatible(*this, o);
  for (std::size_t i = 0; i < coef_.size(); ++i) coef_[i] -= o.coef_[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& c : coef_) c *= s;
  return *this;
}

Jet& Jet::operator+=(double s) {
  coef_[0] += s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  check_compatible(a, b);
  Jet r(a.dim_, a.order_);
  r.coef_[0] = 0.0;
  for (std::size_t i = 0; i < a.coef_.size(); ++i) {
    const double ai = a.coef_[i];
    if (ai == 0.0) continue;
    for (const auto& [j, k] : a.table_->products[i]) r.coef_[k] += ai * b.coef_[j];
  }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) { return a * pow(b, -1.0); }

Jet Jet::compose(std::span<const double> series) const {
  Jet v = *this;
  v.coef_[0] = 0.0;
  const int n = std::min<int>(order_, static_cast<int>(series.size()) - 1);
  Jet r(dim_, order_, series[n]);
  for (int k = n - 1; k >= 0; --k) {
    r = r * v;
    r.coef_[0] += series[k];
  }
  return r;
}

Jet Jet::differentiate(int axis) const {
  if (order_ == 0) return Jet(dim_, 0, 0.0);
  Jet r(dim_, order_ - 1);
  for (std::size_t i = 0; i < r.coef_.size(); ++i) {
    MultiIndex nu = r.monomial(i);
    nu[axis] += 1;
    r.coef_[i] = coefficient(nu) * nu[axis];
  }
  return r;
}

Jet Jet::compose_linear(const Eigen::MatrixXd& a) const {
  if (a.rows() != dim_) throw std::invalid_argument("compose_linear: row count must equal jet dimension");
  const int m = static_cast<int>(a.cols());
  std::vector<std::vector<Jet>> powers(dim_);
  for (int i = 0; i < dim_; ++i) {
    Jet hi(m, order_, 0.0);
    for (int j = 0; j < m; ++j) hi += Jet::variable(m, order_, j, 0.0) * a(i, j);
    powers[i].push_back(Jet(m, order_, 1.0));
    for (int p = 1; p <= order_; ++p) powers[i].push_back(powers[i].back() * hi);
  }
  Jet r(m, order_, 0.0);
  for (std::size_t idx = 0; idx < coef_.size(); ++idx) {
    if (coef_[idx] == 0.0) continue;
    const MultiIndex& nu = monomial(idx);
    Jet term(m, order_, coef_[idx]);
    for (int i = 0; i < dim_; ++i)
      if (nu[i] > 0) term = term * powers[i][nu[i]];
    r += term;
  }
  return r;
}

Jet Jet::truncated(int order) const {
  Jet r(dim_, order);
  for (std::size_t i = 0; i < r.coef_.size(); ++i) r.coef_[i] = coefficient(r.monomial(i));
  return r;
}

double Jet::evaluate(std::span<const double> h) const {
  double s = 0.0;
  for (std::size_t idx = 0; idx < coef_.size(); ++idx) {
    const MultiIndex& nu = monomial(idx);
    double term = coef_[idx];
    for (int i = 0; i < dim_; ++i) term *= std::pow(h[i], nu[i]);
    s += term;
  }
  return s;
}

Jet pow(const Jet& u, double r) {
  const double u0 = u.constant();
  std::vector<double> s(u.order() + 1);
  for (int n = 0; n <= u.order(); ++n) s[n] = binomial_real(r, n) * std::pow(u0, r - n);
  return u.compose(s);
}

Jet sqrt(const Jet& u) {
  if (!(u.constant() > 0.0)) throw std::domain_error("jet sqrt needs positive constant term");
  return pow(u, 0.5);
}

Jet exp(const Jet& u) {
  const double e0 = std::exp(u.constant());
  std::vector<double> s(u.order() + 1);
  for (int n = 0; n <= u.order(); ++n) s[n] = e0 / factorial(n);
  return u.compose(s);
}

Jet log(const Jet& u) {
  const double u0 = u.constant();
  if (!(u0 > 0.0)) throw std::domain_error("jet log needs positive constant term");
  std::vector<double> s(u.order() + 1);
  s[0] = std::log(u0);
  for (int n = 1; n <= u.order(); ++n) s[n] = ((n % 2) ? 1.0 : -1.0) / (n * std::pow(u0, n));
  return u.compose(s);
}

Jet sin(const Jet& u) {
  const double u0 = u.constant();
  std::vector<double> s(u.order() + 1);
  for (int n = 0; n <= u.order(); ++n) s[n] = std::sin(u0 + n * M_PI / 2) / factorial(n);
  return u.compose(s);
}

Jet cos(const Jet& u) {
  const double u0 = u.constant();
  std::vector<double> s(u.order() + 1);
  for (int n = 0; n <= u.order(); ++n) s[n] = std::cos(u0 + n * M_PI / 2) / factorial(n);
  return u.compose(s);
}

Jet square(const Jet& u) { return u * u; }

namespace {

// Offsets (in units of h) and weights of a second-order central stencil for
// the n-th derivative.
std::vector<std::pair<int, double>> central_stencil(int n) {
  std::map<int, double> w;
  auto add_delta = [&](int top, double scale) {
    double c = 1.0;
    for (int j = 0; j <= n; ++j) {
      if (j > 0) c = c * (n - j + 1) / j;
      w[top - j] += scale * ((j % 2) ? -c : c);
    }
  };
  if (n % 2 == 0) {
    add_delta(n / 2, 1.0);
  } else {
    add_delta((n + 1) / 2, 0.5);
    add_delta((n - 1) / 2, 0.5);
  }
  std::vector<std::pair<int, double>> out;
  for (auto [o, v] : w)
    if (v != 0.0) out.emplace_back(o, v);
  return out;
}

double mixed_difference(const std::function<double(std::span<const double>)>& f, std::span<const double> x0,
                        const MultiIndex& nu, double h) {
  const int d = static_cast<int>(x0.size());
  std::vector<std::vector<std::pair<int, double>>> st(d);
  for (int i = 0; i < d; ++i) st[i] = nu[i] > 0 ? central_stencil(nu[i]) : std::vector<std::pair<int, double>>{{0, 1.0}};
  std::vector<std::size_t> pos(d, 0);
  std::vector<double> x(x0.begin(), x0.end());
  // Fixed-order accumulation over the tensor stencil.
  double acc = 0.0, comp = 0.0;
  while (true) {
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      w *= st[i][pos[i]].second;
      x[i] = x0[i] + st[i][pos[i]].first * h;
    }
    const double term = w * f(x);
    const double t = acc + term;
    comp += std::abs(acc) >= std::abs(term) ? (acc - t) + term : (term - t) + acc;
    acc = t;
    int a = 0;
    while (a < d) {
      if (++pos[a] < st[a].size()) break;
      pos[a] = 0;
      ++a;
    }
    if (a == d) break;
  }
  int k = 0;
  for (int v : nu) k += v;
  return (acc + comp) / std::pow(h, k);
}

}  // namespace

Jet finite_difference_jet(const std::function<double(std::span<const double>)>& f, std::span<const double> x0,
                          int order, double scale) {
  const int d = static_cast<int>(x0.size());
  Jet jet(d, order);
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t idx = 0; idx < jet.size(); ++idx) {
    const MultiIndex& nu = jet.monomial(idx);
    int k = 0;
    for (int v : nu) k += v;
    double value;
    if (k == 0) {
      value = f(x0);
    } else {
      const double h = std::pow(eps, 1.0 / (k + 2)) * scale;
      const double coarse = mixed_difference(f, x0, nu, h);
      const double fine = mixed_difference(f, x0, nu, h / 2);
      value = (4.0 * fine - coarse) / 3.0;
    }
    jet.coef(idx) = value / multi_factorial(nu);
  }
  return jet;
}

Eigen::VectorXd finite_difference_gradient(const std::function<double(std::span<const double>)>& f,
                                           std::span<const double> x0, double scale) {
  const int d = static_cast<int>(x0.size());
  Jet j = finite_difference_jet(f, x0, 1, scale);
  Eigen::VectorXd g(d);
  for (int i = 0; i < d; ++i) {
    MultiIndex nu(d, 0);
    nu[i] = 1;
    g[i] = j.derivative(nu);
  }
  return g;
}

Eigen::MatrixXd finite_difference_hessian(const std::function<double(std::span<const double>)>& f,
                                          std::span<const double> x0, double scale) {
  const int d = static_cast<int>(x0.size());
  Eigen::MatrixXd h(d, d);
  const double eps = std::numeric_limits<double>::epsilon();
  const double step = std::pow(eps, 0.25) * scale;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      MultiIndex nu(d, 0);
      nu[i] += 1;
      nu[j] += 1;
      const double coarse = mixed_difference(f, x0, nu, step);
      const double fine = mixed_difference(f, x0, nu, step / 2);
      h(i, j) = h(j, i) = (4.0 * fine - coarse) / 3.0;
    }
  }
  return h;
}

}  // namespace latrem
