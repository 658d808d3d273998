#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "chc/expression.hpp"
#include "chc/report.hpp"
#include "chc/yamabe.hpp"

namespace chc {

/// Quadrature rule along one parameter axis: tensor-product trapezoid on
/// periodic axes, Gauss-Legendre otherwise.
struct QuadAxis {
  enum class Kind { TrapezoidPeriodic, GaussLegendre };
  Kind kind = Kind::TrapezoidPeriodic;
  int n = 32;
  double a = 0.0, b = 2.0 * M_PI;
};

/// Closed hypersurface given by a smooth embedding of a parameter box; the
/// embedding returns d jets in the d-1 parameters, expanded at the node.
struct ClosedSurfaceSpec {
  std::string name;
  int d = 3;
  std::vector<QuadAxis> axes;  // d-1 axes
  std::function<std::vector<Jet>(std::span<const double>, int)> embed;
  double orient = 1.0;  // multiplies the cross-product normal

  ClosedSurfaceSpec with_nodes(int n) const;
};

ClosedSurfaceSpec sphere_spec(int d, double radius, int n);
ClosedSurfaceSpec torus_spec(double R, double r, int n);
ClosedSurfaceSpec s1xs2_spec(double R, double r, int n);
/// Radial graph r0 (1 + perturbation(nu)) over the round sphere; the
/// perturbation is a polynomial in the unit-vector components.
ClosedSurfaceSpec perturbed_sphere_spec(int d, double r0, std::vector<double> coeffs,
                                        double amp, int n);
/// d expressions of the d-1 parameters (names u, v, w).
ClosedSurfaceSpec parametrized_spec(int d, std::vector<Expression> components,
                                    std::vector<QuadAxis> axes, const std::string& name);

/// Ambient metric for the energy pipeline: flat or conformally flat.
struct AmbientSpec {
  int d = 3;
  std::optional<Expression> omega;  // Omega^2 delta when present

  bool flat() const { return !omega.has_value(); }
  static AmbientSpec euclidean(int d) { return {d, std::nullopt}; }
  static AmbientSpec conformally_flat(int d, Expression om) { return {d, std::move(om)}; }
};

/// Quadrature node with the local hypersurface data.
struct SurfaceSample {
  std::vector<double> point;  // ambient coordinates
  double weight = 0.0;        // parameter-box quadrature weight
  double dA = 0.0;            // area density of the embedding at the node
  double H = 0.0;
  double K = 0.0;        // IIo . IIo
  double trIIo3 = 0.0;   // tr IIo^3
  double L = 0.0;        // IIo . Fialkow (d >= 4)
  double B = 0.0;        // obstruction density (on request, d <= 4)
};

/// Local geometry at one node: converts the embedding to a level set in
/// rotated coordinates and reads the frame off the unit defining function.
SurfaceSample sample_geometry(const ClosedSurfaceSpec& spec, const AmbientSpec& ambient,
                              std::span<const double> u, int order, bool want_B = false,
                              bool want_L = false);

/// Frame data from a level-set expression at a given surface point
/// (representation-independence checks).
SurfaceSample sample_from_levelset(const Expression& levelset, const AmbientSpec& ambient,
                                   std::span<const double> point, int order);

struct EnergyReport {
  std::string name;
  double value = 0.0;
  double coarse_value = 0.0;   // node count halved
  double error_estimate = 0.0;
  std::vector<double> node_integrands;  // kept when requested
};

/// sum in a deterministic pairwise order (independent of any threading)
double pairwise_sum(std::span<const double> v);

/// E = int IIo.IIo dA over a closed surface in a 3-dimensional ambient.
EnergyReport willmore_energy_2d(const ClosedSurfaceSpec& spec, const AmbientSpec& ambient,
                                int order = 4, bool keep_nodes = false);

/// E = 8 int tr IIo^3 dA, d = 4, conformally flat ambient (the flat-case
/// form of 8 int L); a curved ambient falls back to energy_general.
EnergyReport rigidity_energy_3d(const ClosedSurfaceSpec& spec, const AmbientSpec& ambient,
                                int order = 4, bool keep_nodes = false);

/// E = int N^A P_{d-1} N_A dA via the holographic Laplacian power, d = 3, 4.
EnergyReport energy_general(const ClosedSurfaceSpec& spec, const AmbientSpec& ambient,
                            int order = -1, bool keep_nodes = false);

/// int B phi dA over the surface for a normal bump phi (expression in the
/// parameters), plus the energy of the phi-perturbed surface at offset eps.
double obstruction_integral(const ClosedSurfaceSpec& spec, const AmbientSpec& ambient,
                            const std::function<double(std::span<const double>)>& phi,
                            int order = 5);

/// Central-difference dE/deps for E = int K under X -> X + eps phi nu,
/// compared with int B phi dA; reports the fitted constant per variation.
struct GradientCheckResult {
  std::vector<double> fitted_constants;
  double spread = 0.0;      // max relative deviation from the mean
  double mean_constant = 0.0;
};
GradientCheckResult gradient_check(const ClosedSurfaceSpec& spec, const AmbientSpec& ambient,
                                   int variations, unsigned seed, double eps = 1e-3,
                                   int order = 5);

/// The frozen regression constant in dE/deps = c int B phi dA for E = int K
/// in d = 3 (determined numerically once; see tests).
inline constexpr double kWillmoreGradientConstant = -6.0;

}  // namespace chc
