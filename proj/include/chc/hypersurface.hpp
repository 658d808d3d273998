#pragma once

#include <memory>
#include <vector>

#include "chc/geometry.hpp"
#include "chc/jet.hpp"
#include "chc/jet_map.hpp"
#include "chc/report.hpp"

namespace chc {

/// Defining function with |grad s|^2_g = 1 + O(s^{ell+1}); the base point
/// sits on the zero locus.
struct DefiningFunction {
  Jet s;
  int improvement_order = 0;  // ell
};

/// Improves s0 towards a unit defining function: normalize by |grad s0|,
/// then kill the order-j residual of |grad s|^2 - 1 with s += beta s^{j+1},
/// beta = -a_j / (2(j+1)).  Every step re-verifies the residual order.
DefiningFunction unit_improve(const Jet& s0, const MetricGeometry& geo, int target_order);

/// Base-point extrinsic data of the zero locus of a unit defining function.
/// Ambient indices throughout; II, IIo are tangentially projected.
struct HypersurfaceFrame {
  std::shared_ptr<const MetricGeometry> geo;
  Jet s;                   // the unit defining function
  std::vector<Jet> n_cov;  // n_a = d_a s
  std::vector<Jet> n_up;   // n^a = g^{ab} d_b s
  Jet div_n;               // Delta s

  std::vector<double> nhat;      // unit conormal at the base point
  std::vector<double> nhat_up;   // raised
  std::vector<double> gbar;      // induced metric gamma_ab = g_ab - n_a n_b at base
  std::vector<double> gamma_mix; // projector gamma^a_b at base
  std::vector<double> II, IIo;   // second fundamental form / trace-free part
  double H = 0.0;                // mean curvature, (div n)/(d-1)
  double K = 0.0;                // rigidity density IIo . IIo

  int dim() const { return geo->dim(); }
};

HypersurfaceFrame second_fundamental_form(const DefiningFunction& s,
                                          std::shared_ptr<const MetricGeometry> geo);

/// Intrinsic geometry of the zero locus via a graph chart over the tangent
/// plane at the base point: x = base + Q^T (y, h(y)).
struct IntrinsicGeometry {
  std::shared_ptr<const MetricGeometry> ambient;
  std::shared_ptr<const MetricGeometry> geo;  // (Sigma, gbar), dim d-1
  std::vector<double> rot;                    // Q, row-major d x d; last row ~ grad s
  std::vector<Jet> chart;                     // d jets in d-1 vars (offsets from base)
  std::vector<Jet> jac;                       // J^a_i, d x (d-1)

  Jet H;                      // mean curvature along the chart
  TensorField II, IIo;        // chart tensors over `geo`
  std::vector<Jet> nhat_cov;  // ambient conormal components along the chart

  int d() const { return ambient->dim(); }

  /// Pullback of an ambient scalar / fully covariant tensor to the chart.
  Jet pullback_scalar(const Jet& f) const;
  TensorField pullback(const TensorField& T) const;

  /// Ambient covector representation (zero normal component) of an intrinsic
  /// covector's base-point value.
  std::vector<double> push_covector(std::vector<double> v) const;

  /// (T_{ab} n^b)^top as an intrinsic covector field along the chart, for an
  /// ambient 2-tensor T.
  TensorField pullback_contracted_normal(const TensorField& T) const;

  // intrinsic derived fields (chart tensors over `geo`)
  TensorField grad_IIo() const;       // nabla-bar_i IIo_{jk}
  TensorField div_IIo() const;        // nabla-bar . IIo_j
  Jet div_div_IIo() const;            // nabla-bar . nabla-bar . IIo
  Jet lap_H() const;                  // Delta-bar H
  TensorField lap_IIo() const;        // Delta-bar IIo
  TensorField fialkow() const;        // P^top - Pbar + H IIo + 1/2 gbar H^2
  Jet rigidity_L() const;             // IIo . Fialkow
};

IntrinsicGeometry intrinsic_geometry(const HypersurfaceFrame& frame);

/// Two-sided checks of the Riemannian hypersurface identities (Gauss,
/// Codazzi-Mainardi, Ricci relation, third-jet decomposition, contracted
/// variants, Laplacian relation, box-H, traced Codazzi).
Report riemannian_identity_suite(const HypersurfaceFrame& frame, const IntrinsicGeometry& intr,
                                 double tol = 1e-8);

/// k-fold directional derivative along n^a = g^{ab} d_b sigma of a scalar.
Jet normal_derivative(const MetricGeometry& geo, const Jet& sigma, const Jet& f, int k = 1);

/// Graph mean curvature oracle:
/// -(f_xx + f_yy + f_y^2 f_xx - 2 f_x f_y f_xy + f_x^2 f_yy) / (2 (1+|df|^2)^{3/2}).
double graph_mean_curvature_formula(const Jet& f);

}  // namespace chc
