#pragma once

#include <span>
#include <vector>

#include "chc/multi_index.hpp"

namespace chc {

/// Truncated multivariate Taylor polynomial at a base point.
///
/// A Jet of dimension n and order N stores all coefficients of degree <= N
/// in the layout of IndexTable(n, N).  Variables are offsets from the base
/// point.  Arithmetic is closed at the minimum order of the operands and is
/// exact on all retained degrees.
class Jet {
public:
  Jet() : dim_(1), order_(0), c_(1, 0.0) {}
  Jet(int dim, int order);

  static Jet constant(int dim, int order, double v);
  /// base + x_var as a jet.
  static Jet variable(int dim, int order, int var, double base = 0.0);

  int dim() const { return dim_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(c_.size()); }
  const IndexTable& table() const { return IndexTable::get(dim_, order_); }

  double value() const { return c_[0]; }
  double& operator[](int pos) { return c_[pos]; }
  double operator[](int pos) const { return c_[pos]; }
  std::span<const double> coefficients() const { return c_; }

  /// Coefficient by multi-index (0 when the degree exceeds the order).
  double coeff(const Exponents& e) const;
  void set_coeff(const Exponents& e, double v);

  Jet truncated(int new_order) const;
  /// Same coefficients viewed at a higher order (zero padding).
  Jet extended(int new_order) const;

  /// Exact partial derivative; lowers the order by one.
  Jet derivative(int var) const;

  double max_abs() const;
  /// Largest |coefficient| among terms of the given total degree.
  double max_abs_at_degree(int deg) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator+=(double v) { c_[0] += v; return *this; }
  Jet& operator-=(double v) { c_[0] -= v; return *this; }
  Jet& operator*=(double v);

  friend Jet operator+(Jet a, const Jet& b) { a += b; return a; }
  friend Jet operator-(Jet a, const Jet& b) { a -= b; return a; }
  friend Jet operator+(Jet a, double v) { a += v; return a; }
  friend Jet operator+(double v, Jet a) { a += v; return a; }
  friend Jet operator-(Jet a, double v) { a -= v; return a; }
  friend Jet operator-(double v, const Jet& a) { return -a + v; }
  friend Jet operator*(Jet a, double v) { a *= v; return a; }
  friend Jet operator*(double v, Jet a) { a *= v; return a; }
  friend Jet operator/(Jet a, double v) { a *= 1.0 / v; return a; }
  friend Jet operator*(const Jet& a, const Jet& b);

private:
  int dim_, order_;
  std::vector<double> c_;
};

/// Truncated Cauchy product; operands must share dimension and order.
Jet jet_multiply(const Jet& a, const Jet& b);

/// f composed with g where `series[k]` is the k-th Taylor coefficient of f
/// about g's constant term; g enters through its non-constant part.
Jet jet_compose_univariate(std::span<const double> series, const Jet& g);

Jet jet_reciprocal(const Jet& a);  // requires a.value() != 0
Jet jet_sqrt(const Jet& a);        // requires a.value() > 0
Jet jet_exp(const Jet& a);
Jet jet_log(const Jet& a);         // requires a.value() > 0
Jet jet_sin(const Jet& a);
Jet jet_cos(const Jet& a);
Jet jet_pow(const Jet& a, double p);  // requires a.value() > 0
Jet jet_powi(const Jet& a, int n);    // integer power, any constant term

}  // namespace chc
