#include "chc/jet_map.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace chc {

namespace {

constexpr double kZeroConstTol = 1e-11;

Jet substitute_rec(const Jet& f, std::span<const Jet> args, int out_dim, int out_order) {
  const int n = f.dim();
  if (n == 1) {
    const Jet& g = args[0];
    Jet acc = Jet::constant(out_dim, out_order, f[f.size() - 1]);
    for (int k = f.size() - 2; k >= 0; --k) {
      acc = acc * g;
      acc += f[k];
    }
    return acc;
  }
  // Slice by the exponent of the last variable, recurse, Horner in args[n-1].
  const IndexTable& tab = f.table();
  const IndexTable& sub = IndexTable::get(n - 1, f.order());
  std::vector<Jet> slices(f.order() + 1, Jet(n - 1, f.order()));
  std::vector<bool> nonzero(f.order() + 1, false);
  int top = 0;
  for (int p = 0; p < f.size(); ++p) {
    if (f[p] == 0.0) continue;
    Exponents e = tab.exponents(p);
    int k = e[n - 1];
    e[n - 1] = 0;
    slices[k][sub.position(e)] = f[p];
    nonzero[k] = true;
    top = std::max(top, k);
  }
  const Jet& g = args[n - 1];
  Jet acc = substitute_rec(slices[top], args.first(n - 1), out_dim, out_order);
  for (int k = top - 1; k >= 0; --k) {
    acc = acc * g;
    if (nonzero[k]) acc += substitute_rec(slices[k], args.first(n - 1), out_dim, out_order);
  }
  return acc;
}

}  // namespace

Jet jet_substitute(const Jet& f, std::span<const Jet> args) {
  if (static_cast<int>(args.size()) != f.dim())
    throw std::invalid_argument("jet_substitute: argument count != dimension");
  int out_dim = args[0].dim();
  int out_order = f.order();
  for (const Jet& a : args) {
    if (a.dim() != out_dim) throw std::invalid_argument("jet_substitute: mixed argument dimensions");
    out_order = std::min(out_order, a.order());
    if (std::abs(a.value()) > kZeroConstTol)
      throw std::invalid_argument("jet_substitute: argument has non-zero constant term");
  }
  std::vector<Jet> trimmed(args.begin(), args.end());
  for (Jet& a : trimmed) {
    if (a.order() != out_order) a = a.truncated(out_order);
    a[0] = 0.0;
  }
  return substitute_rec(f, trimmed, out_dim, out_order);
}

Jet jet_linear_change(const Jet& f, std::span<const double> A, int m, int order) {
  const int n = f.dim();
  if (static_cast<int>(A.size()) != n * m)
    throw std::invalid_argument("jet_linear_change: matrix size mismatch");
  std::vector<Jet> args;
  args.reserve(n);
  for (int i = 0; i < n; ++i) {
    Jet a(m, order);
    for (int j = 0; j < m; ++j)
      if (A[i * m + j] != 0.0) a[1 + j] = A[i * m + j];
    args.push_back(std::move(a));
  }
  return jet_substitute(f, args);
}

std::vector<Jet> jet_invert_map(std::span<const Jet> F) {
  const int n = static_cast<int>(F.size());
  const int order = F[0].order();
  for (const Jet& f : F) {
    if (f.dim() != n) throw std::invalid_argument("jet_invert_map: map is not square");
    if (std::abs(f.value()) > kZeroConstTol)
      throw std::invalid_argument("jet_invert_map: map does not fix the origin");
  }
  Eigen::MatrixXd J(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) J(i, j) = F[i][1 + j];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
  if (!lu.isInvertible()) throw std::domain_error("jet_invert_map: singular Jacobian");
  Eigen::MatrixXd Jinv = lu.inverse();

  // G <- G + J^{-1} (y - F(G)); gains at least one correct order per pass.
  std::vector<Jet> G(n, Jet(n, order));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G[i][1 + j] = Jinv(i, j);
  for (int pass = 1; pass < order; ++pass) {
    std::vector<Jet> R(n);
    for (int i = 0; i < n; ++i) {
      R[i] = -jet_substitute(F[i], G);
      R[i][1 + i] += 1.0;  // + y_i
    }
    for (int i = 0; i < n; ++i) {
      Jet delta(n, order);
      for (int j = 0; j < n; ++j)
        if (Jinv(i, j) != 0.0) delta += Jinv(i, j) * R[j];
      G[i] += delta;
    }
  }
  for (int i = 0; i < n; ++i) G[i][0] = 0.0;
  return G;
}

AdaptedCoords::AdaptedCoords(const Jet& sigma) : dim_(sigma.dim()), order_(sigma.order()) {
  if (std::abs(sigma.value()) > 1e-9)
    throw std::invalid_argument("AdaptedCoords: sigma does not vanish at the base point");
  Eigen::VectorXd v(dim_);
  for (int i = 0; i < dim_; ++i) v(i) = sigma[1 + i];
  if (v.norm() < 1e-10)
    throw std::domain_error("AdaptedCoords: sigma has vanishing gradient at the base point");

  // Rows 0..dim-2: orthonormal complement of grad sigma; last row: sigma itself.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
  Eigen::MatrixXd Q = qr.householderQ();
  forward_.reserve(dim_);
  for (int i = 0; i < dim_ - 1; ++i) {
    Jet row(dim_, order_);
    for (int j = 0; j < dim_; ++j) row[1 + j] = Q(j, i + 1);
    forward_.push_back(std::move(row));
  }
  Jet s = sigma;
  s[0] = 0.0;
  forward_.push_back(std::move(s));
  inverse_ = jet_invert_map(forward_);
}

Jet AdaptedCoords::to_adapted(const Jet& f) const { return jet_substitute(f, inverse_); }

Jet AdaptedCoords::from_adapted(const Jet& ftilde) const { return jet_substitute(ftilde, forward_); }

int AdaptedCoords::vanishing_order(const Jet& f, double tol, double* below) const {
  Jet ft = to_adapted(f);
  const IndexTable& tab = ft.table();
  double scale = std::max(1.0, ft.max_abs());
  std::vector<double> block(order_ + 1, 0.0);
  for (int p = 0; p < ft.size(); ++p)
    block[tab.exponents(p)[dim_ - 1]] = std::max(block[tab.exponents(p)[dim_ - 1]], std::abs(ft[p]));
  double seen = 0.0;
  for (int k = 0; k <= ft.order(); ++k) {
    if (block[k] > tol * scale) {
      if (below) *below = seen;
      return k;
    }
    seen = std::max(seen, block[k]);
  }
  if (below) *below = seen;
  return ft.order() + 1;
}

Jet AdaptedCoords::divide(const Jet& f, int k, double tol) const {
  Jet ft = to_adapted(f);
  const IndexTable& tab = ft.table();
  const int new_order = ft.order() - k;
  if (new_order < 0) throw std::invalid_argument("AdaptedCoords::divide: order too low");
  double scale = std::max(1.0, ft.max_abs());
  Jet shifted(dim_, new_order);
  const IndexTable& out = shifted.table();
  for (int p = 0; p < ft.size(); ++p) {
    Exponents e = tab.exponents(p);
    if (e[dim_ - 1] < k) {
      if (std::abs(ft[p]) > tol * scale)
        throw std::domain_error("AdaptedCoords::divide: jet is not divisible by sigma^k");
      continue;
    }
    e[dim_ - 1] = static_cast<std::uint8_t>(e[dim_ - 1] - k);
    int q = out.position(e);
    if (q >= 0) shifted[q] = ft[p];
  }
  std::vector<Jet> fw(forward_);
  for (Jet& a : fw) a = a.truncated(new_order);
  return jet_substitute(shifted, fw);
}

Jet AdaptedCoords::slice_coefficient(const Jet& f, int k) const {
  Jet ft = to_adapted(f);
  const IndexTable& tab = ft.table();
  const int new_order = ft.order() - k;
  if (new_order < 0) throw std::invalid_argument("AdaptedCoords::slice_coefficient: order too low");
  Jet slice(dim_, new_order);
  const IndexTable& out = slice.table();
  for (int p = 0; p < ft.size(); ++p) {
    Exponents e = tab.exponents(p);
    if (e[dim_ - 1] != k) continue;
    e[dim_ - 1] = 0;
    int q = out.position(e);
    if (q >= 0) slice[q] = ft[p];
  }
  std::vector<Jet> fw(forward_);
  for (Jet& a : fw) a = a.truncated(new_order);
  return jet_substitute(slice, fw);
}

}  // namespace chc
