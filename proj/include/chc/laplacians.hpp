#pragma once

#include "chc/tractor.hpp"

namespace chc {

/// Extrinsic conformal Laplacian power P_k = (-(1/I^2) I.D)^k for a conformal
/// unit defining density; tangential, mapping weight (k-d+1)/2 to
/// (-k-d+1)/2.  k > d-1 exceeds the canonical determination of sigma.
struct ExtrinsicLaplacian {
  int k = 0;
  ScaleData sd;
  bool beyond_canonical = false;  // k > d-1: flagged non-natural

  double domain_weight() const { return (k - sd.geo->dim() + 1) / 2.0; }
  double output_weight() const { return (-k - sd.geo->dim() + 1) / 2.0; }

  /// Applies the holographic power; V.weight must equal domain_weight().
  TractorField apply(const TractorField& V) const;
};

ExtrinsicLaplacian build_Pk(const YamabeContext& ctx, int k);

/// max over random sections T of |(op . sigma) T|_Sigma|, normalized.
double tangentiality_residual(const YamabeContext& ctx, int k, unsigned seed, int sections = 5);
/// Negative control: the plain tractor Laplacian is not tangential.
double laplace_tangentiality_residual(const YamabeContext& ctx, unsigned seed, int sections = 5);

/// Closed form P_2 = Delta^top + ((3-d)/2)(Jbar - K/(2(d-2))) along Sigma on
/// weight (3-d)/2 tractors; base-point values.
std::vector<double> P2_closed(const YamabeContext& ctx, const TractorField& V);

/// Per-instance data shared by the P_3 formulas (tractor curvature,
/// divergences of IIo, corner scalars).
struct P3Forms {
  const YamabeContext* ctx = nullptr;
  ScaleData sd;
  std::vector<Jet> omega;           // tractor curvature endomorphism
  std::vector<double> iio_up;       // raised IIo at the base point
  std::vector<double> divIIo_up;    // pushed to an ambient vector
  double corner_closed = 0.0, corner_inv = 0.0, Lsc = 0.0, pdot = 0.0;

  std::vector<double> closed(const TractorField& V) const;
  std::vector<double> invariant(const TractorField& V) const;
};
P3Forms make_P3_forms(const YamabeContext& ctx, int order);

/// Closed form for P_3 (d >= 4) on weight (4-d)/2 tractors; base-point values.
std::vector<double> P3_closed(const YamabeContext& ctx, const TractorField& V);

/// Manifestly invariant form of P_3 built from the tractor second fundamental
/// form and the tangential Thomas D-operator at the Yamabe weights.
std::vector<double> P3_invariant_form(const YamabeContext& ctx, const TractorField& V);

/// Boundary Yamabe operator: Delta^top + (3/2 - d/2)(Jbar - K/(2(d-2))),
/// equal to (I.D)^2 along Sigma at weight (3-d)/2.
std::vector<double> yamabe_top(const YamabeContext& ctx, const TractorField& V);

/// P2/P3 closed forms vs the holographic power on random sections, the
/// tangentiality certificates, and the GJMS degeneration on umbilic flats.
Report laplacian_suite(const YamabeContext& ctx, unsigned seed, int sections = 20,
                       double tol = 1e-8);

}  // namespace chc
