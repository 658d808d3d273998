#pragma once

#include <memory>
#include <vector>

#include "chc/report.hpp"
#include "chc/yamabe.hpp"

namespace chc {

/// Tractor(-tensor) field in a fixed scale.  Each tractor index splits as
/// (+ , a , -) with slots 0, 1..d, d+1; middle components carry a lower
/// tensor index.  `xrank` leading covariant tensor indices come from
/// differentiation.  Component layout: tensor indices slowest, then tractor
/// slots, first index slowest within each group.
struct TractorField {
  std::shared_ptr<const MetricGeometry> geo;  // the scale the components live in
  int trank = 0;
  int xrank = 0;
  double weight = 0.0;
  int order = 0;
  std::vector<Jet> c;

  TractorField() = default;
  TractorField(std::shared_ptr<const MetricGeometry> g, int trank, int xrank, double weight,
               int order);

  int dim() const { return geo->dim(); }
  int tsize() const;  // (d+2)^trank
  int size() const { return static_cast<int>(c.size()); }

  Jet& at(std::span<const int> tensor_idx, std::span<const int> tractor_idx);
  const Jet& at(std::span<const int> tensor_idx, std::span<const int> tractor_idx) const;
  Jet& at(std::initializer_list<int> tensor_idx, std::initializer_list<int> tractor_idx) {
    return at(std::span<const int>(tensor_idx.begin(), tensor_idx.size()),
              std::span<const int>(tractor_idx.begin(), tractor_idx.size()));
  }
  const Jet& at(std::initializer_list<int> tensor_idx,
                std::initializer_list<int> tractor_idx) const {
    return at(std::span<const int>(tensor_idx.begin(), tensor_idx.size()),
              std::span<const int>(tractor_idx.begin(), tractor_idx.size()));
  }
  Jet& tr(std::initializer_list<int> tractor_idx) {
    return at(std::span<const int>(), std::span<const int>(tractor_idx.begin(), tractor_idx.size()));
  }
  const Jet& tr(std::initializer_list<int> tractor_idx) const {
    return at(std::span<const int>(), std::span<const int>(tractor_idx.begin(), tractor_idx.size()));
  }

  TractorField& operator+=(const TractorField& o);
  TractorField& operator-=(const TractorField& o);
  friend TractorField operator+(TractorField a, const TractorField& b) { a += b; return a; }
  friend TractorField operator-(TractorField a, const TractorField& b) { a -= b; return a; }
  TractorField operator*(double v) const;
  TractorField operator*(const Jet& v) const;

  double max_abs_value() const;
  std::vector<double> base_values() const;
};

/// sigma, rho and the gradient jets of a defining density in a scale;
/// everything the Laplace-Robin and tangential operators need.
struct ScaleData {
  std::shared_ptr<const MetricGeometry> geo;
  Jet sigma;
  Jet rho;
  std::vector<Jet> n_cov, n_up;
  Jet I2;  // = S(g, sigma)

  static ScaleData make(std::shared_ptr<const MetricGeometry> geo, const Jet& sigma);
};

/// Tractor connection nabla^T_a (adds a leading tensor index).
TractorField tractor_connection(const TractorField& V);
/// Tractor-coupled Laplacian.
TractorField tractor_laplace(const TractorField& V);
/// v^a nabla^T_a V for contravariant component jets v.
TractorField tractor_directional(const TractorField& V, std::span<const Jet> v);

/// Thomas D-operator; hatted = D / (d + 2w - 2) (excluded at w = 1 - d/2).
TractorField thomas_D(const TractorField& V, bool hatted);

/// Canonical tractor X (weight 1) and tractor metric h (weight 0, rank 2).
TractorField canonical_X(std::shared_ptr<const MetricGeometry> geo, int order);
TractorField tractor_metric_h(std::shared_ptr<const MetricGeometry> geo, int order);

/// Scale tractor I = (sigma, grad sigma, rho), weight 0.
TractorField scale_tractor(const ScaleData& sd, int order = -1);

/// Laplace-Robin operator I.D (unhatted; defined at all weights) and its
/// hatted version (excluded at w = 1 - d/2).
TractorField i_dot_D(const ScaleData& sd, const TractorField& V);
TractorField i_dot_Dhat(const ScaleData& sd, const TractorField& V);

/// Full h-contraction of two equal-rank tractor fields (middles via g^{-1}).
Jet tractor_pair(const TractorField& A, const TractorField& B);
/// Contraction of a rank-1 tractor against one tractor slot of B.
TractorField contract_rank1(const TractorField& A, const TractorField& B, int slot);
/// h-trace of two tractor slots of one field.
TractorField self_contract(const TractorField& T, int i, int j);
/// A (rank 1) tensored in front of B: A_X B_... as a new first tractor slot.
TractorField prepend_rank1(const TractorField& A, const TractorField& B);

/// Components of V in the scale Omega^2 g.
TractorField to_scale(const TractorField& V, std::shared_ptr<const MetricGeometry> new_geo,
                      const Jet& omega);

/// P^{AB} = Dhat^A I^B (weight -1, rank 2).
TractorField P_tractor(const ScaleData& sd);

/// Splitting map q on trace-free symmetric 2-tensors of weight w+2 and its
/// left inverse q* (middle-block extraction).  Excluded weights w = 1-n, -n.
TractorField q_split(const TensorField& t, double w);
TensorField q_star(const TractorField& T, double kernel_tol = 1e-8);

/// Tangential derivative (nabla_a - n_a nabla_n) V and the corresponding
/// gamma-traced Laplacian.
TractorField tangential_grad(const ScaleData& sd, const TractorField& V);
TractorField tangential_laplace(const ScaleData& sd, const TractorField& V);

/// Tractor curvature endomorphism Omega_{ab}{}^S{}_T as jets, layout
/// [((a d + b) S + s) S + t] with S = d + 2.
std::vector<Jet> tractor_curvature(std::shared_ptr<const MetricGeometry> geo, int order);

/// Tangential Thomas D-operator for a conformal unit defining density
/// (excluded when d + 2w is 2, 3 or 4).
TractorField tangential_Dhat(const ScaleData& sd, const TractorField& V);

/// Intrinsic tractor second fundamental form L^{AB} = q(IIo) over the chart
/// geometry (d >= 4).
TractorField tractor_L(const IntrinsicGeometry& intr);

/// Base-point map of an intrinsic tractor into ambient slots through the
/// normal-tractor-orthogonal identification.
std::vector<double> intrinsic_to_ambient_base(const TractorField& T, const YamabeContext& ctx);

// identity suites ----------------------------------------------------------

/// Structural checks: nabla X, nabla h = 0, X.X = 0, X.I = sigma, signature,
/// D.X eigenvalue, X.Dhat = w, Dhat sigma = I, scale-transition round trips.
Report tractor_core_suite(const YamabeContext& ctx, unsigned seed, double tol = 1e-10);

/// sl(2) commutators, the modified Leibniz rule, [Dhat, sigma^k], I.P,
/// and the Laplace-Robin boundary operator I.Dhat = grad_n - wH.
Report tractor_identity_suite(const YamabeContext& ctx, unsigned seed, double tol = 1e-9);

/// P^{AB} checks: symmetry, X-contraction, q* P = IIo, P.P = K, the gradient
/// slot formulas, the holographic Fialkow identity, and I.Dhat K = -2(d-3) L.
Report p_tractor_suite(const YamabeContext& ctx, double tol = 1e-8);

/// Hypersurface tractor calculus: tangentiality of Dhat^T, the scale matrix
/// form, Dhat^T (X T), HOLII, DTII, and the Fialkow-Gauss transport.
Report tractor_hypersurface_suite(const YamabeContext& ctx, unsigned seed, double tol = 1e-8);

}  // namespace chc
