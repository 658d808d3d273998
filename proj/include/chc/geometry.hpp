#pragma once

#include <memory>
#include <span>
#include <vector>

#include "chc/jet.hpp"

namespace chc {

class MetricGeometry;

/// Tensor with all indices covariant, components stored as jets around the
/// base point.  Index order is row-major, first index slowest.
struct TensorField {
  const MetricGeometry* geo = nullptr;
  int rank = 0;
  int order = 0;
  std::vector<Jet> c;

  TensorField() = default;
  TensorField(const MetricGeometry& g, int rank, int order);

  int dim() const;
  int size() const { return static_cast<int>(c.size()); }
  Jet& at(std::span<const int> idx);
  const Jet& at(std::span<const int> idx) const;
  Jet& at(std::initializer_list<int> idx) { return at(std::span<const int>(idx.begin(), idx.size())); }
  const Jet& at(std::initializer_list<int> idx) const {
    return at(std::span<const int>(idx.begin(), idx.size()));
  }

  TensorField& operator+=(const TensorField& o);
  TensorField& operator-=(const TensorField& o);
  friend TensorField operator+(TensorField a, const TensorField& b) { a += b; return a; }
  friend TensorField operator-(TensorField a, const TensorField& b) { a -= b; return a; }
  TensorField operator*(double v) const;
  TensorField operator*(const Jet& v) const;

  /// Largest |component value| at the base point.
  double max_abs_value() const;
};

/// Ambient (or intrinsic) Riemannian data: metric jets plus the derived
/// connection and curvature jets, all fully covariant.
///
/// Conventions (docs/conventions.md): R_{ab}{}^c{}_d v^d = [nabla_a, nabla_b] v^c,
/// Ric_ab = R_{ca}{}^c{}_b, Delta = g^{ab} nabla_a nabla_b, J = Sc / (2(d-1)).
class MetricGeometry {
public:
  /// Builds the full curvature package from metric component jets (row-major
  /// dim x dim, symmetric, positive definite constant term).
  static std::shared_ptr<const MetricGeometry> make(std::vector<Jet> metric);
  static std::shared_ptr<const MetricGeometry> euclidean(int dim, int order);
  /// Geometry of Omega^2 delta.
  static std::shared_ptr<const MetricGeometry> conformally_flat(const Jet& omega);
  /// Geometry of Omega^2 g.
  std::shared_ptr<const MetricGeometry> rescaled(const Jet& omega) const;

  int dim() const { return dim_; }
  int order() const { return order_; }           // metric jet order
  int curvature_order() const { return order_ - 2; }
  bool flat() const { return flat_; }

  const Jet& g(int a, int b) const { return g_[a * dim_ + b]; }
  const Jet& ginv(int a, int b) const { return ginv_[a * dim_ + b]; }
  /// Christoffel of the second kind, Gamma^c_{ab}; order() - 1.
  const Jet& gamma(int c, int a, int b) const { return gamma_[(c * dim_ + a) * dim_ + b]; }
  /// R_{abcd} (first/last pairs antisymmetric, pair symmetric); order() - 2.
  const Jet& riemann(int a, int b, int cc, int d) const {
    return riem_[((a * dim_ + b) * dim_ + cc) * dim_ + d];
  }
  const Jet& ricci(int a, int b) const { return ric_[a * dim_ + b]; }
  const Jet& scal() const { return sc_; }
  const Jet& jj() const { return jay_; }  // J = Sc / (2(d-1))
  const Jet& schouten(int a, int b) const;
  const Jet& weyl(int a, int b, int cc, int d) const;
  const Jet& einstein(int a, int b) const { return einstein_[a * dim_ + b]; }

  TensorField metric_field(int order) const;
  TensorField schouten_field() const;
  TensorField ricci_field() const;

private:
  MetricGeometry() = default;
  void build();

  int dim_ = 0, order_ = 0;
  bool flat_ = false;
  std::vector<Jet> g_, ginv_, gamma_, riem_, ric_, schouten_, weyl_, einstein_;
  Jet sc_, jay_;
};

/// nabla_a T_{b...}; prepends the derivative index, lowers the order by one.
TensorField covariant_derivative(const TensorField& T);

/// v^a nabla_a T (contravariant components v).
TensorField directional_derivative(const TensorField& T, std::span<const Jet> v);

/// g^{ij} contraction of two covariant slots.
TensorField trace(const TensorField& T, int i, int j);

/// Full contraction g^{a c} g^{b d} ... A_{ab..} B_{cd..} of equal-rank tensors.
Jet full_contraction(const TensorField& A, const TensorField& B);

/// [nabla_a, nabla_b] T via Riemann contractions: rank+2 field, indices (a, b)
/// prepended.  Matches the antisymmetrized double covariant derivative.
TensorField commutator_action(const TensorField& T);

/// Scalar Laplacian g^{ab} nabla_a nabla_b f.
Jet laplacian(const MetricGeometry& geo, const Jet& f);

/// Gradient with raised index, g^{ab} d_b f.
std::vector<Jet> gradient_up(const MetricGeometry& geo, const Jet& f);

/// |df|^2_g.
Jet grad_norm2(const MetricGeometry& geo, const Jet& f);

/// Inverse of a symmetric jet matrix (row-major n x n).
std::vector<Jet> jet_matrix_inverse(std::span<const Jet> m, int n);

}  // namespace chc
