#pragma once

#include <memory>
#include <random>

#include "chc/geometry.hpp"
#include "chc/jet.hpp"

namespace chc {

using Rng = std::mt19937_64;

/// Builders for the randomized suites: analytic metrics and hypersurfaces
/// with degree-damped coefficients so order-6 jets stay well conditioned.
/// Coefficients are uniform in [-1/2, 1/2] scaled by amp * decay^(degree-1).
Jet random_polynomial(Rng& rng, int dim, int order, double amp, double decay = 0.4,
                      bool zero_constant = true, bool zero_linear = false);

/// delta + small symmetric analytic perturbation, positive definite at 0.
std::shared_ptr<const MetricGeometry> random_metric(Rng& rng, int dim, int order,
                                                    double amp = 0.15);

/// Omega^2 delta with Omega = exp(small polynomial).
std::shared_ptr<const MetricGeometry> random_conformally_flat(Rng& rng, int dim, int order,
                                                              double amp = 0.3);

/// Positive conformal factor exp(p) with p(0) ~ 0.
Jet random_conformal_factor(Rng& rng, int dim, int order, double amp = 0.3);

/// Graph defining function x_d - f(x_1..x_{d-1}) with f(0) = 0; `tilt` allows
/// a nonzero gradient of f at the base point.
Jet random_graph_defining_function(Rng& rng, int dim, int order, double amp = 0.4,
                                   double tilt = 0.3);

/// Defining function times a generic positive factor (tests improvement from
/// arbitrary starting data).
Jet random_scaled_defining_function(Rng& rng, int dim, int order, double amp = 0.4);

}  // namespace chc
