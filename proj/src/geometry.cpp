#include "chc/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace chc {

namespace {
int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}
}  // namespace

TensorField::TensorField(const MetricGeometry& g, int rank, int order)
    : geo(&g), rank(rank), order(order) {
  c.assign(ipow(g.dim(), rank), Jet(g.dim(), order));
}

int TensorField::dim() const { return geo->dim(); }

Jet& TensorField::at(std::span<const int> idx) {
  int flat = 0;
  for (int i : idx) flat = flat * dim() + i;
  return c[flat];
}

const Jet& TensorField::at(std::span<const int> idx) const {
  int flat = 0;
  for (int i : idx) flat = flat * dim() + i;
  return c[flat];
}

TensorField& TensorField::operator+=(const TensorField& o) {
  if (rank != o.rank) throw std::invalid_argument("TensorField: rank mismatch");
  order = std::min(order, o.order);
  for (int i = 0; i < size(); ++i) c[i] += o.c[i];
  return *this;
}

TensorField& TensorField::operator-=(const TensorField& o) {
  if (rank != o.rank) throw std::invalid_argument("TensorField: rank mismatch");
  order = std::min(order, o.order);
  for (int i = 0; i < size(); ++i) c[i] -= o.c[i];
  return *this;
}

TensorField TensorField::operator*(double v) const {
  TensorField out = *this;
  for (Jet& j : out.c) j *= v;
  return out;
}

TensorField TensorField::operator*(const Jet& v) const {
  TensorField out = *this;
  out.order = std::min(order, v.order());
  for (Jet& j : out.c) j = j * v;
  return out;
}

double TensorField::max_abs_value() const {
  double m = 0.0;
  for (const Jet& j : c) m = std::max(m, std::abs(j.value()));
  return m;
}

std::vector<Jet> jet_matrix_inverse(std::span<const Jet> m, int n) {
  const int dim = m[0].dim();
  const int order = m[0].order();
  std::vector<Jet> a(m.begin(), m.end());
  std::vector<Jet> inv(n * n, Jet(dim, order));
  for (int i = 0; i < n; ++i) inv[i * n + i] = Jet::constant(dim, order, 1.0);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col].value()) > std::abs(a[piv * n + col].value())) piv = r;
    if (a[piv * n + col].value() == 0.0)
      throw std::domain_error("jet_matrix_inverse: singular matrix at the base point");
    if (piv != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(a[piv * n + j], a[col * n + j]);
        std::swap(inv[piv * n + j], inv[col * n + j]);
      }
    }
    Jet s = jet_reciprocal(a[col * n + col]);
    for (int j = 0; j < n; ++j) {
      a[col * n + j] = a[col * n + j] * s;
      inv[col * n + j] = inv[col * n + j] * s;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      Jet f = a[r * n + col];
      if (f.max_abs() == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a[r * n + j] -= f * a[col * n + j];
        inv[r * n + j] -= f * inv[col * n + j];
      }
    }
  }
  return inv;
}

std::shared_ptr<const MetricGeometry> MetricGeometry::make(std::vector<Jet> metric) {
  auto geo = std::shared_ptr<MetricGeometry>(new MetricGeometry());
  const int n2 = static_cast<int>(metric.size());
  int dim = static_cast<int>(std::lround(std::sqrt(double(n2))));
  if (dim * dim != n2) throw std::invalid_argument("MetricGeometry: metric is not square");
  geo->dim_ = dim;
  geo->order_ = metric[0].order();
  if (geo->order_ < 2) throw std::invalid_argument("MetricGeometry: metric jet order must be >= 2");
  geo->g_ = std::move(metric);
  geo->build();
  return geo;
}

std::shared_ptr<const MetricGeometry> MetricGeometry::euclidean(int dim, int order) {
  std::vector<Jet> g(dim * dim, Jet(dim, order));
  for (int i = 0; i < dim; ++i) g[i * dim + i] = Jet::constant(dim, order, 1.0);
  auto geo = make(std::move(g));
  const_cast<MetricGeometry&>(*geo).flat_ = true;
  return geo;
}

std::shared_ptr<const MetricGeometry> MetricGeometry::conformally_flat(const Jet& omega) {
  const int dim = omega.dim();
  Jet o2 = omega * omega;
  std::vector<Jet> g(dim * dim, Jet(dim, omega.order()));
  for (int i = 0; i < dim; ++i) g[i * dim + i] = o2;
  return make(std::move(g));
}

std::shared_ptr<const MetricGeometry> MetricGeometry::rescaled(const Jet& omega) const {
  if (omega.value() <= 0.0)
    throw std::domain_error("conformal rescale: Omega must be positive at the base point");
  Jet o2 = omega.truncated(std::min(order_, omega.order())) *
           omega.truncated(std::min(order_, omega.order()));
  std::vector<Jet> g(dim_ * dim_);
  for (int i = 0; i < dim_ * dim_; ++i) g[i] = g_[i] * o2;
  return make(std::move(g));
}

void MetricGeometry::build() {
  const int d = dim_;
  const int N = order_;

  // symmetry + positive definite constant term
  Eigen::MatrixXd g0(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      g0(a, b) = g(a, b).value();
      Jet diff = g_[a * d + b] - g_[b * d + a];
      if (diff.max_abs() > 1e-12 * std::max(1.0, g_[a * d + b].max_abs()))
        throw std::invalid_argument("MetricGeometry: metric is not symmetric");
    }
  Eigen::LLT<Eigen::MatrixXd> llt(g0);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("MetricGeometry: metric is not positive definite at the base point");

  ginv_ = jet_matrix_inverse(g_, d);

  // Gamma^c_{ab} = 1/2 g^{cd} (d_a g_{db} + d_b g_{da} - d_d g_{ab})
  gamma_.assign(d * d * d, Jet(d, N - 1));
  std::vector<Jet> dg(d * d * d);  // d_a g_{bc}
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int cc = 0; cc < d; ++cc) dg[(a * d + b) * d + cc] = g(b, cc).derivative(a);
  for (int cc = 0; cc < d; ++cc)
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        Jet sum(d, N - 1);
        for (int e = 0; e < d; ++e) {
          Jet t = dg[(a * d + e) * d + b] + dg[(b * d + e) * d + a] - dg[(e * d + a) * d + b];
          sum += ginv(cc, e) * t;
        }
        sum *= 0.5;
        gamma_[(cc * d + a) * d + b] = sum;
        gamma_[(cc * d + b) * d + a] = sum;
      }

  // R_{ab}{}^c{}_d then lower: riem_[abcd] = g_{ce} R_{ab}{}^e{}_d
  std::vector<Jet> rup(d * d * d * d, Jet(d, N - 2));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < a; ++b)
      for (int cc = 0; cc < d; ++cc)
        for (int e = 0; e < d; ++e) {
          Jet r = gamma(cc, b, e).derivative(a) - gamma(cc, a, e).derivative(b);
          for (int f = 0; f < d; ++f)
            r += gamma(cc, a, f) * gamma(f, b, e) - gamma(cc, b, f) * gamma(f, a, e);
          rup[((a * d + b) * d + cc) * d + e] = r;
          rup[((b * d + a) * d + cc) * d + e] = -r;
        }
  riem_.assign(d * d * d * d, Jet(d, N - 2));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int cc = 0; cc < d; ++cc)
        for (int e = 0; e < d; ++e) {
          Jet r(d, N - 2);
          for (int f = 0; f < d; ++f) r += g(cc, f) * rup[((a * d + b) * d + f) * d + e];
          riem_[((a * d + b) * d + cc) * d + e] = r;
        }

  // Ric_{ab} = g^{ce} R_{caeb}
  ric_.assign(d * d, Jet(d, N - 2));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      Jet r(d, N - 2);
      for (int cc = 0; cc < d; ++cc)
        for (int e = 0; e < d; ++e) r += ginv(cc, e) * riemann(cc, a, e, b);
      ric_[a * d + b] = r;
    }

  sc_ = Jet(d, N - 2);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) sc_ += ginv(a, b) * ricci(a, b);
  jay_ = sc_ / (2.0 * (d - 1));

  einstein_.assign(d * d, Jet(d, N - 2));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) einstein_[a * d + b] = ricci(a, b) - 0.5 * sc_ * g(a, b);

  if (d == 2) {
    // 2-manifolds: P = (J/2) g keeps J = P^a_a (used by dimension-3
    // hypersurface charts; flagged non-invariant there)
    schouten_.assign(d * d, Jet(d, N - 2));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) schouten_[a * d + b] = 0.5 * jay_ * g(a, b);
  }
  if (d >= 3) {
    schouten_.assign(d * d, Jet(d, N - 2));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        schouten_[a * d + b] = (ricci(a, b) - jay_ * g(a, b)) / double(d - 2);
    // W = R - (P /\ g): R_{abcd} - (P_{ac} g_{bd} - P_{bc} g_{ad} + P_{bd} g_{ac} - P_{ad} g_{bc})
    weyl_.assign(d * d * d * d, Jet(d, N - 2));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int cc = 0; cc < d; ++cc)
          for (int e = 0; e < d; ++e) {
            Jet w = riemann(a, b, cc, e) - schouten(a, cc) * g(b, e) + schouten(b, cc) * g(a, e) -
                    schouten(b, e) * g(a, cc) + schouten(a, e) * g(b, cc);
            weyl_[((a * d + b) * d + cc) * d + e] = w;
          }
  }
}

const Jet& MetricGeometry::schouten(int a, int b) const {
  if (schouten_.empty())
    throw std::domain_error("Schouten tensor needs dimension >= 2 (unsupported dimension)");
  return schouten_[a * dim_ + b];
}

const Jet& MetricGeometry::weyl(int a, int b, int cc, int d) const {
  if (weyl_.empty())
    throw std::domain_error("Weyl tensor needs dimension >= 3 (unsupported dimension)");
  return weyl_[((a * dim_ + b) * dim_ + cc) * dim_ + d];
}

TensorField MetricGeometry::metric_field(int order) const {
  TensorField t(*this, 2, order);
  for (int i = 0; i < dim_ * dim_; ++i) t.c[i] = g_[i].truncated(order);
  return t;
}

TensorField MetricGeometry::schouten_field() const {
  TensorField t(*this, 2, curvature_order());
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b) t.c[a * dim_ + b] = schouten(a, b);
  return t;
}

TensorField MetricGeometry::ricci_field() const {
  TensorField t(*this, 2, curvature_order());
  for (int i = 0; i < dim_ * dim_; ++i) t.c[i] = ric_[i];
  return t;
}

TensorField covariant_derivative(const TensorField& T) {
  const MetricGeometry& geo = *T.geo;
  const int d = geo.dim();
  TensorField out(geo, T.rank + 1, T.order - 1);
  std::vector<int> idx(T.rank);
  const int n = T.size();
  for (int flat = 0; flat < n; ++flat) {
    int rem = flat;
    for (int i = T.rank - 1; i >= 0; --i) {
      idx[i] = rem % d;
      rem /= d;
    }
    for (int a = 0; a < d; ++a) {
      Jet v = T.c[flat].derivative(a);
      for (int slot = 0; slot < T.rank; ++slot) {
        int save = idx[slot];
        int stride = ipow(d, T.rank - 1 - slot);
        int base = flat - save * stride;
        for (int e = 0; e < d; ++e) v -= geo.gamma(e, a, save) * T.c[base + e * stride];
        idx[slot] = save;
      }
      out.c[a * n + flat] = std::move(v);
    }
  }
  return out;
}

TensorField directional_derivative(const TensorField& T, std::span<const Jet> v) {
  TensorField grad = covariant_derivative(T);
  const int d = T.dim();
  const int n = T.size();
  TensorField out(*T.geo, T.rank, grad.order);
  for (int flat = 0; flat < n; ++flat) {
    Jet s(d, grad.order);
    for (int a = 0; a < d; ++a) s += v[a] * grad.c[a * n + flat];
    out.c[flat] = std::move(s);
  }
  return out;
}

TensorField trace(const TensorField& T, int i, int j) {
  if (i > j) std::swap(i, j);
  const MetricGeometry& geo = *T.geo;
  const int d = geo.dim();
  TensorField out(geo, T.rank - 2, T.order);
  const int si = ipow(d, T.rank - 1 - i), sj = ipow(d, T.rank - 1 - j);
  std::vector<int> idx(T.rank - 2, 0);
  for (int oflat = 0; oflat < out.size(); ++oflat) {
    // expand oflat into the source index pattern with slots i, j free
    int rem = oflat;
    for (int k = T.rank - 3; k >= 0; --k) {
      idx[k] = rem % d;
      rem /= d;
    }
    int base = 0;
    int k = 0;
    for (int slot = 0; slot < T.rank; ++slot) {
      if (slot == i || slot == j) continue;
      base = base + idx[k] * ipow(d, T.rank - 1 - slot);
      ++k;
    }
    Jet s(d, T.order);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) s += geo.ginv(a, b) * T.c[base + a * si + b * sj];
    out.c[oflat] = std::move(s);
  }
  return out;
}

Jet full_contraction(const TensorField& A, const TensorField& B) {
  if (A.rank != B.rank) throw std::invalid_argument("full_contraction: rank mismatch");
  const MetricGeometry& geo = *A.geo;
  const int d = geo.dim();
  const int order = std::min(A.order, B.order);
  // raise all indices of B, slot by slot
  std::vector<Jet> raised(B.c.begin(), B.c.end());
  for (int slot = 0; slot < B.rank; ++slot) {
    std::vector<Jet> next(raised.size(), Jet(d, order));
    int stride = ipow(d, B.rank - 1 - slot);
    for (int flat = 0; flat < static_cast<int>(raised.size()); ++flat) {
      int a = (flat / stride) % d;
      int base = flat - a * stride;
      Jet s(d, order);
      for (int b = 0; b < d; ++b) s += geo.ginv(a, b) * raised[base + b * stride];
      next[flat] = std::move(s);
    }
    raised = std::move(next);
  }
  Jet out(d, order);
  for (int flat = 0; flat < A.size(); ++flat) out += A.c[flat] * raised[flat];
  return out;
}

TensorField commutator_action(const TensorField& T) {
  const MetricGeometry& geo = *T.geo;
  const int d = geo.dim();
  const int ord = std::min(T.order, geo.curvature_order());
  TensorField out(geo, T.rank + 2, ord);
  const int n = T.size();
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int flat = 0; flat < n; ++flat) {
        Jet v(d, ord);
        int rem = flat;
        std::vector<int> idx(T.rank);
        for (int i = T.rank - 1; i >= 0; --i) {
          idx[i] = rem % d;
          rem /= d;
        }
        for (int slot = 0; slot < T.rank; ++slot) {
          int save = idx[slot];
          int stride = ipow(d, T.rank - 1 - slot);
          int base = flat - save * stride;
          // [nabla_a,nabla_b] omega_c = -R_{ab}{}^e{}_c omega_e
          for (int e = 0; e < d; ++e) {
            Jet rufe(d, ord);
            for (int f = 0; f < d; ++f) rufe += geo.ginv(e, f) * geo.riemann(a, b, f, save);
            v -= rufe * T.c[base + e * stride];
          }
          idx[slot] = save;
        }
        out.c[(a * d + b) * n + flat] = std::move(v);
      }
  return out;
}

Jet laplacian(const MetricGeometry& geo, const Jet& f) {
  const int d = geo.dim();
  Jet out(d, f.order() - 2);
  for (int a = 0; a < d; ++a) {
    Jet da = f.derivative(a);
    for (int b = 0; b < d; ++b) {
      Jet t = da.derivative(b);
      for (int e = 0; e < d; ++e) t -= geo.gamma(e, a, b) * f.derivative(e);
      out += geo.ginv(a, b) * t;
    }
  }
  return out;
}

std::vector<Jet> gradient_up(const MetricGeometry& geo, const Jet& f) {
  const int d = geo.dim();
  std::vector<Jet> v(d, Jet(d, f.order() - 1));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) v[a] += geo.ginv(a, b) * f.derivative(b);
  return v;
}

Jet grad_norm2(const MetricGeometry& geo, const Jet& f) {
  const int d = geo.dim();
  Jet out(d, f.order() - 1);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) out += geo.ginv(a, b) * f.derivative(a) * f.derivative(b);
  return out;
}

}  // namespace chc
