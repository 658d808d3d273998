#include <cmath>

#include "chc/energy.hpp"
#include "chc/random_instances.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace chc;
using testutil::residual;

namespace {
Expression omega_expr(int d, const std::string& text) {
  auto names = Expression::ambient_names(d);
  return Expression::parse(text, names);
}
}  // namespace

TEST_CASE("sample_geometry: sphere and torus oracles") {
  AmbientSpec flat3 = AmbientSpec::euclidean(3);
  {
    ClosedSurfaceSpec sp = sphere_spec(3, 2.0, 8);
    double u[] = {0.3, 1.1};
    SurfaceSample s = sample_geometry(sp, flat3, u, 4);
    CHECK(s.H == doctest::Approx(0.5).epsilon(1e-11));
    CHECK(std::abs(s.K) < 1e-20);
  }
  {
    double R = 2.0, r = 0.7, v = 0.9;
    ClosedSurfaceSpec to = torus_spec(R, r, 8);
    double u[] = {0.4, v};
    SurfaceSample s = sample_geometry(to, flat3, u, 4);
    double k1 = 1.0 / r, k2 = std::cos(v) / (R + r * std::cos(v));
    CHECK(residual(s.H, 0.5 * (k1 + k2)) < 1e-11);
    CHECK(residual(s.K, 0.5 * (k1 - k2) * (k1 - k2)) < 1e-11);
  }
  {
    // S1 x S2: principal curvatures 1/r (twice) and t/(R + r t), outward
    double R = 2.0, r = 0.8, t = 0.25;
    AmbientSpec flat4 = AmbientSpec::euclidean(4);
    ClosedSurfaceSpec s12 = s1xs2_spec(R, r, 6);
    double u[] = {0.7, t, 1.3};
    SurfaceSample s = sample_geometry(s12, flat4, u, 4, false, true);
    double k1 = 1.0 / r, k2 = t / (R + r * t);
    double H = (2.0 * k1 + k2) / 3.0;
    double K = 2.0 * (k1 - H) * (k1 - H) + (k2 - H) * (k2 - H);
    double tr3 = 2.0 * std::pow(k1 - H, 3) + std::pow(k2 - H, 3);
    CHECK(residual(s.H, H) < 1e-11);
    CHECK(residual(s.K, K) < 1e-11);
    CHECK(residual(s.trIIo3, tr3) < 1e-11);
    // conformally flat ambient: L = tr IIo^3
    CHECK(residual(s.L, tr3) < 1e-10);
  }
}

TEST_CASE("representation independence: level-set chart gives identical samples") {
  AmbientSpec flat3 = AmbientSpec::euclidean(3);
  ClosedSurfaceSpec sp = sphere_spec(3, 1.3, 8);
  double u[] = {0.42, 2.2};
  SurfaceSample para = sample_geometry(sp, flat3, u, 5);
  Expression lvl = omega_expr(3, "sqrt(x^2 + y^2 + z^2) - 1.3");
  SurfaceSample lev = sample_from_levelset(lvl, flat3, para.point, 5);
  CHECK(residual(para.H, lev.H) < 1e-10);
  CHECK(std::abs(para.K - lev.K) < 1e-10);

  // and on a curved (conformally flat) ambient
  AmbientSpec cf = AmbientSpec::conformally_flat(3, omega_expr(3, "exp(0.2*x - 0.1*y*z)"));
  SurfaceSample pc = sample_geometry(sp, cf, u, 5);
  SurfaceSample lc = sample_from_levelset(lvl, cf, para.point, 5);
  CHECK(residual(pc.H, lc.H) < 1e-10);
  CHECK(residual(pc.K, lc.K) < 1e-10);
}

TEST_CASE("round sphere energies vanish") {
  AmbientSpec flat3 = AmbientSpec::euclidean(3);
  EnergyReport e = willmore_energy_2d(sphere_spec(3, 1.0, 16), flat3, 4);
  CHECK(std::abs(e.value) < 1e-10);

  AmbientSpec flat4 = AmbientSpec::euclidean(4);
  EnergyReport r = rigidity_energy_3d(sphere_spec(4, 1.2, 8), flat4, 4);
  CHECK(std::abs(r.value) < 1e-10);
}

TEST_CASE("Clifford-ratio torus: int K = 4 pi^2 with spectral convergence") {
  AmbientSpec flat3 = AmbientSpec::euclidean(3);
  EnergyReport e = willmore_energy_2d(torus_spec(std::sqrt(2.0), 1.0, 32), flat3, 4);
  CHECK(std::abs(e.value - 4.0 * M_PI * M_PI) < 1e-6);
  CHECK(std::abs(e.value - e.coarse_value) <= e.error_estimate + 1e-15);

  // doubling nodes reduces the error by at least 10x
  double e8 = willmore_energy_2d(torus_spec(std::sqrt(2.0), 1.0, 8), flat3, 4).value;
  double e16 = willmore_energy_2d(torus_spec(std::sqrt(2.0), 1.0, 16), flat3, 4).value;
  double exact = 4.0 * M_PI * M_PI;
  CHECK(std::abs(e16 - exact) * 10.0 <= std::abs(e8 - exact));
}

TEST_CASE("reparametrization and orientation behaviour of the energies") {
  AmbientSpec flat3 = AmbientSpec::euclidean(3);
  double R = std::sqrt(2.0), r = 1.0;
  ClosedSurfaceSpec t1 = torus_spec(R, r, 24);

  // reparametrize v -> v + 0.3 sin v (periodic, orientation preserving)
  ClosedSurfaceSpec t2 = t1;
  t2.embed = [R, r](std::span<const double> u, int order) {
    Jet uu = Jet::variable(2, order, 0, u[0]);
    Jet vv0 = Jet::variable(2, order, 1, u[1]);
    Jet vv = vv0 + 0.3 * jet_sin(vv0);
    Jet ring = R + r * jet_cos(vv);
    std::vector<Jet> X(3);
    X[0] = ring * jet_cos(uu);
    X[1] = ring * jet_sin(uu);
    X[2] = r * jet_sin(vv);
    return X;
  };
  double e1 = willmore_energy_2d(t1, flat3, 4).value;
  double e2 = willmore_energy_2d(t2, flat3, 4).value;
  CHECK(residual(e1, e2) < 1e-8);

  // orientation flip leaves int K unchanged
  ClosedSurfaceSpec t3 = t1;
  t3.orient = -1.0;
  double e3 = willmore_energy_2d(t3, flat3, 4).value;
  CHECK(residual(e1, e3) < 1e-12);

  // the cubic d = 4 integrand is orientation-odd (tr IIo^3 flips with nhat)
  AmbientSpec flat4 = AmbientSpec::euclidean(4);
  ClosedSurfaceSpec s12 = s1xs2_spec(2.0, 0.8, 10);
  ClosedSurfaceSpec s12f = s12;
  s12f.orient = -s12.orient;
  double r1 = rigidity_energy_3d(s12, flat4, 4).value;
  double r2 = rigidity_energy_3d(s12f, flat4, 4).value;
  CHECK(residual(r1, -r2) < 1e-10);
}

TEST_CASE("energy_general agrees with the direct energies") {
  AmbientSpec flat3 = AmbientSpec::euclidean(3);
  ClosedSurfaceSpec to = torus_spec(std::sqrt(2.0), 1.0, 16);
  double ek = willmore_energy_2d(to, flat3, 4).value;
  double eg = energy_general(to, flat3).value;
  CHECK(std::abs(eg + ek) < 1e-6);

  AmbientSpec flat4 = AmbientSpec::euclidean(4);
  ClosedSurfaceSpec s12 = s1xs2_spec(2.0, 0.8, 10);
  double el = rigidity_energy_3d(s12, flat4, 4).value;
  double eg4 = energy_general(s12, flat4).value;
  CHECK(std::abs(eg4 - el) < 1e-5);
}

TEST_CASE("conformal invariance of the energies") {
  // d = 3: int K under a random smooth Omega
  AmbientSpec flat3 = AmbientSpec::euclidean(3);
  AmbientSpec cf3 = AmbientSpec::conformally_flat(
      3, omega_expr(3, "exp(0.15*x - 0.1*y + 0.08*z + 0.05*x*y)"));
  ClosedSurfaceSpec to = torus_spec(1.5, 0.6, 24);
  double e_flat = willmore_energy_2d(to, flat3, 4).value;
  double e_curv = willmore_energy_2d(to, cf3, 4).value;
  CHECK(std::abs(e_flat - e_curv) < 1e-7);

  double g_flat = energy_general(to.with_nodes(16), flat3).value;
  double g_curv = energy_general(to.with_nodes(16), cf3).value;
  CHECK(std::abs(g_flat - g_curv) < 1e-6);

  // d = 4: 8 int L and int N P3 N under a random smooth Omega
  AmbientSpec flat4 = AmbientSpec::euclidean(4);
  AmbientSpec cf4 = AmbientSpec::conformally_flat(
      4, omega_expr(4, "exp(0.1*x - 0.07*y + 0.05*z*w)"));
  ClosedSurfaceSpec s12 = s1xs2_spec(2.0, 0.8, 10);
  double l_flat = rigidity_energy_3d(s12, flat4, 4).value;
  double l_curv = rigidity_energy_3d(s12, cf4, 4).value;
  CHECK(std::abs(l_flat - l_curv) < 1e-6);

  double q_flat = energy_general(s12.with_nodes(8), flat4).value;
  double q_curv = energy_general(s12.with_nodes(8), cf4).value;
  CHECK(std::abs(q_flat - q_curv) < 1e-5);
}

TEST_CASE("gradient-obstruction agreement on a perturbed sphere") {
  AmbientSpec flat3 = AmbientSpec::euclidean(3);
  ClosedSurfaceSpec ps = perturbed_sphere_spec(
      3, 1.0, {0.3, -0.2, 0.15, 0.25, -0.1, 0.2, 0.1, -0.15, 0.05}, 0.35, 20);
  GradientCheckResult g = gradient_check(ps, flat3, 2, 777, 1e-3, 5);
  CHECK(g.spread < 1e-3);
  CHECK(residual(g.mean_constant, kWillmoreGradientConstant) < 1e-3);

  // round sphere: dE/deps = 0 and int B phi = 0
  ClosedSurfaceSpec sp = sphere_spec(3, 1.0, 16);
  auto phi = [](std::span<const double>) { return 1.0; };
  CHECK(std::abs(obstruction_integral(sp, flat3, phi, 5)) < 1e-9);
}

TEST_CASE("degenerate nodes are reported") {
  AmbientSpec flat3 = AmbientSpec::euclidean(3);
  ClosedSurfaceSpec bad = sphere_spec(3, 1.0, 8);
  bad.embed = [](std::span<const double>, int order) {
    std::vector<Jet> X(3, Jet(2, order));  // constant map: rank 0
    return X;
  };
  double u[] = {0.3, 0.4};
  CHECK_THROWS_WITH_AS(sample_geometry(bad, flat3, u, 4), doctest::Contains("rank-deficient"),
                       std::domain_error);
}
