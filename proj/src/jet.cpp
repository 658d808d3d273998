#include "chc/jet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chc {

Jet::Jet(int dim, int order) : dim_(dim), order_(order) {
  c_.assign(IndexTable::get(dim, order).size(), 0.0);
}

Jet Jet::constant(int dim, int order, double v) {
  Jet j(dim, order);
  j.c_[0] = v;
  return j;
}

Jet Jet::variable(int dim, int order, int var, double base) {
  if (var < 0 || var >= dim) throw std::invalid_argument("Jet::variable: var out of range");
  Jet j(dim, order);
  j.c_[0] = base;
  if (order >= 1) j.c_[1 + var] = 1.0;  // degree-1 block is lexicographic in var
  return j;
}

double Jet::coeff(const Exponents& e) const {
  int pos = table().position(e);
  return pos < 0 ? 0.0 : c_[pos];
}

void Jet::set_coeff(const Exponents& e, double v) {
  int pos = table().position(e);
  if (pos < 0) throw std::invalid_argument("Jet::set_coeff: degree exceeds order");
  c_[pos] = v;
}

Jet Jet::truncated(int new_order) const {
  if (new_order > order_) throw std::invalid_argument("Jet::truncated: order would grow");
  if (new_order == order_) return *this;
  Jet j(dim_, new_order);
  std::copy_n(c_.begin(), j.c_.size(), j.c_.begin());
  return j;
}

Jet Jet::extended(int new_order) const {
  if (new_order < order_) throw std::invalid_argument("Jet::extended: order would shrink");
  Jet j(dim_, new_order);
  std::copy_n(c_.begin(), c_.size(), j.c_.begin());
  return j;
}

Jet Jet::derivative(int var) const {
  if (order_ == 0) return Jet::constant(dim_, 0, 0.0);
  const IndexTable& tab = table();
  Jet out(dim_, order_ - 1);
  for (int p = 0; p < size(); ++p) {
    int q = tab.shifted_down(p, var);
    if (q >= 0) out.c_[q] = c_[p] * tab.exponents(p)[var];
  }
  return out;
}

double Jet::max_abs() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

double Jet::max_abs_at_degree(int deg) const {
  if (deg > order_) return 0.0;
  const IndexTable& tab = table();
  double m = 0.0;
  for (int p = tab.size_at_order(deg - 1); p < tab.size_at_order(deg); ++p)
    m = std::max(m, std::abs(c_[p]));
  return m;
}

Jet Jet::operator-() const {
  Jet j = *this;
  for (double& v : j.c_) v = -v;
  return j;
}

namespace {
void check_dim(const Jet& a, const Jet& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("jet dimension mismatch");
}
}  // namespace

Jet& Jet::operator+=(const Jet& o) {
  check_dim(*this, o);
  if (o.order() < order_) *this = truncated(o.order());
  for (int p = 0; p < size(); ++p) c_[p] += o.c_[p];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_dim(*this, o);
  if (o.order() < order_) *this = truncated(o.order());
  for (int p = 0; p < size(); ++p) c_[p] -= o.c_[p];
  return *this;
}

Jet& Jet::operator*=(double v) {
  for (double& x : c_) x *= v;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  check_dim(a, b);
  int ord = std::min(a.order(), b.order());
  return jet_multiply(a.order() == ord ? a : a.truncated(ord),
                      b.order() == ord ? b : b.truncated(ord));
}

Jet jet_multiply(const Jet& a, const Jet& b) {
  if (a.dim() != b.dim() || a.order() != b.order())
    throw std::invalid_argument("jet_multiply: dimension/order mismatch");
  Jet out(a.dim(), a.order());
  const auto& tab = a.table().mul_table();
  const size_t n = tab.size();
  size_t i = 0;
  while (i < n) {  // runs share the same left factor; skip zero runs
    const int ia = tab[i].a;
    const double av = a[ia];
    if (av == 0.0) {
      while (i < n && tab[i].a == ia) ++i;
      continue;
    }
    while (i < n && tab[i].a == ia) {
      out[tab[i].c] += av * b[tab[i].b];
      ++i;
    }
  }
  return out;
}

Jet jet_compose_univariate(std::span<const double> series, const Jet& g) {
  // Horner in the non-constant part of g.
  Jet u = g;
  u[0] = 0.0;
  int top = std::min<int>(static_cast<int>(series.size()) - 1, g.order());
  Jet acc = Jet::constant(g.dim(), g.order(), top >= 0 ? series[top] : 0.0);
  for (int k = top - 1; k >= 0; --k) {
    acc = acc * u;
    acc += series[k];
  }
  return acc;
}

namespace {
std::vector<double> recip_series(double c, int n) {
  std::vector<double> s(n + 1);
  double p = 1.0 / c;
  for (int k = 0; k <= n; ++k) {
    s[k] = p;
    p *= -1.0 / c;
  }
  return s;
}
}  // namespace

Jet jet_reciprocal(const Jet& a) {
  if (a.value() == 0.0) throw std::domain_error("jet_reciprocal: zero constant term");
  return jet_compose_univariate(recip_series(a.value(), a.order()), a);
}

Jet jet_sqrt(const Jet& a) {
  if (a.value() <= 0.0) throw std::domain_error("jet_sqrt: non-positive constant term");
  return jet_pow(a, 0.5);
}

Jet jet_exp(const Jet& a) {
  int n = a.order();
  std::vector<double> s(n + 1);
  double e = std::exp(a.value());
  double fact = 1.0;
  for (int k = 0; k <= n; ++k) {
    s[k] = e / fact;
    fact *= (k + 1);
  }
  return jet_compose_univariate(s, a);
}

Jet jet_log(const Jet& a) {
  double c = a.value();
  if (c <= 0.0) throw std::domain_error("jet_log: non-positive constant term");
  int n = a.order();
  std::vector<double> s(n + 1);
  s[0] = std::log(c);
  double p = 1.0 / c;
  for (int k = 1; k <= n; ++k) {
    s[k] = (k % 2 == 1 ? 1.0 : -1.0) * p / k;
    p /= c;
  }
  return jet_compose_univariate(s, a);
}

Jet jet_sin(const Jet& a) {
  int n = a.order();
  std::vector<double> s(n + 1);
  double sc = std::sin(a.value()), cc = std::cos(a.value());
  double fact = 1.0;
  const double cyc[4] = {sc, cc, -sc, -cc};
  for (int k = 0; k <= n; ++k) {
    s[k] = cyc[k % 4] / fact;
    fact *= (k + 1);
  }
  return jet_compose_univariate(s, a);
}

Jet jet_cos(const Jet& a) {
  int n = a.order();
  std::vector<double> s(n + 1);
  double sc = std::sin(a.value()), cc = std::cos(a.value());
  double fact = 1.0;
  const double cyc[4] = {cc, -sc, -cc, sc};
  for (int k = 0; k <= n; ++k) {
    s[k] = cyc[k % 4] / fact;
    fact *= (k + 1);
  }
  return jet_compose_univariate(s, a);
}

Jet jet_pow(const Jet& a, double p) {
  double c = a.value();
  if (c <= 0.0) throw std::domain_error("jet_pow: non-positive constant term");
  int n = a.order();
  std::vector<double> s(n + 1);
  double coef = 1.0;
  for (int k = 0; k <= n; ++k) {
    s[k] = coef * std::pow(c, p - k);
    coef *= (p - k) / (k + 1);
  }
  return jet_compose_univariate(s, a);
}

Jet jet_powi(const Jet& a, int n) {
  if (n < 0) return jet_reciprocal(jet_powi(a, -n));
  Jet acc = Jet::constant(a.dim(), a.order(), 1.0);
  Jet base = a;
  int k = n;
  while (k > 0) {
    if (k & 1) acc = acc * base;
    base = (k >>= 1) > 0 ? base * base : base;
  }
  return acc;
}

}  // namespace chc
