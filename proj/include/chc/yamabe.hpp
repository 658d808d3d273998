#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "chc/hypersurface.hpp"
#include "chc/report.hpp"

namespace chc {

/// Weight-1 defining density sigma in the scale of `geo`, improved so that
/// S(g, sigma) = 1 + O(sigma^m).  When m reaches the dimension, the order-d
/// residual coefficient B (the obstruction) is recorded.
struct DefiningDensity {
  Jet sigma;
  Jet rho;  // -(Delta sigma + J sigma)/d
  int improvement_order = 0;
  std::vector<double> alpha;  // per-step recursion coefficients at the base point
  std::optional<Jet> B;       // (S - 1)/sigma^d, present when improved to order d
  double B_base = 0.0;
};

/// Singular Yamabe operator S(g, sigma) = |d sigma|^2 - (2/d) sigma (Delta + Sc/(2(d-1))) sigma.
Jet s_functional(const MetricGeometry& geo, const Jet& sigma);

Jet rho_of(const MetricGeometry& geo, const Jet& sigma);

/// Improves sigma0 to S(g, sigma) = 1 + O(sigma^target).  At residual order
/// k < d the update is sigma <- sigma (1 + alpha_k sigma^k) with
/// alpha_k = -d A_k / (2 (k+1) (d-k)); each step is re-verified by direct
/// evaluation of S.  target_order = d extracts B; beyond d is obstructed.
DefiningDensity conformal_unit_improve(const Jet& sigma0, const MetricGeometry& geo,
                                       int target_order);

/// Euclidean closed forms for sigma(s) and B_{sigma(s)} built from a unit
/// defining function, d = 3 or 4.
Jet euclidean_sigma_of_unit(const DefiningFunction& s, const MetricGeometry& geo);
Jet euclidean_B_of_unit(const DefiningFunction& s, const MetricGeometry& geo);

/// Frame + intrinsic chart derived from a conformal unit defining density
/// (via the Riemannian unit improvement of the same zero locus).
struct YamabeContext {
  std::shared_ptr<const MetricGeometry> geo;
  DefiningDensity dd;
  HypersurfaceFrame frame;
  IntrinsicGeometry intr;
};

YamabeContext make_context(const Jet& sigma0, std::shared_ptr<const MetricGeometry> geo,
                           int target_order, int frame_order = 3);

struct ObstructionReport {
  double B = 0.0;  // recursion value at the base point
  Report checks;   // closed-form comparisons
};

enum class AmbientKind { Flat, ConformallyFlat, General };

/// B from the recursion cross-checked against every applicable closed form.
/// The curved d=3 formula holds in any scale; the d=3 Willmore form needs a
/// flat scale (H is not conformally covariant); the d=4 quartic form is an
/// intrinsic conformal invariant, so any conformally flat scale qualifies.
ObstructionReport obstruction_density(const YamabeContext& ctx, AmbientKind kind,
                                      double tol = 1e-7);

/// rho = -H, grad_n rho = K/(d-2) + P(n,n), and the third-normal-derivative
/// identity for (1/2) grad_n^3 I^2 + (d-3) grad_n^2 rho.
Report rho_ladder(const YamabeContext& ctx, double tol = 1e-8);

/// Appendix identities: the LTOT expansion of grad_n^3 I^2, the Laplacian
/// relation, the leading-Laplacian lemma, both commutator lemmas, the
/// assembled obstruction formula, and the Einstein-tensor identity.
Report appendix_identity_suite(const YamabeContext& ctx, double tol = 1e-8);

}  // namespace chc
