#include <cmath>

#include "chc/expression.hpp"
#include "chc/hypersurface.hpp"
#include "chc/random_instances.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace chc;
using testutil::jet_residual;
using testutil::residual;

namespace {

Jet sphere_levelset(int dim, int order, double r) {
  // sqrt(|x|^2) - r about the north pole (0,..,0,r)
  auto names = Expression::ambient_names(dim);
  std::string sum = "x^2";
  if (dim >= 2) sum += " + y^2";
  if (dim >= 3) sum += " + z^2";
  if (dim >= 4) sum += " + w^2";
  if (dim >= 5) sum += " + u^2";
  Expression e = Expression::parse("sqrt(" + sum + ") - " + std::to_string(r), names);
  std::vector<double> base(dim, 0.0);
  base[dim - 1] = r;
  return e.evaluate(base, order);
}

Jet graph_levelset(const Jet& f, int order) {
  // z - f(x, y) lifted to ambient dimension f.dim()+1
  int dim = f.dim() + 1;
  std::vector<Jet> args;
  for (int i = 0; i < f.dim(); ++i) args.push_back(Jet::variable(dim, order, i));
  return Jet::variable(dim, order, dim - 1) - jet_substitute(f.extended(order), args);
}

}  // namespace

TEST_CASE("unit_improve: s = z in Euclidean space is a fixed point") {
  auto geo = MetricGeometry::euclidean(3, 6);
  Jet z = Jet::variable(3, 6, 2);
  DefiningFunction s = unit_improve(z, *geo, 4);
  CHECK(s.improvement_order >= 4);
  CHECK(jet_residual(s.s, z) < 1e-14);
}

TEST_CASE("unit_improve reproduces the first-improvement graph formula") {
  Rng rng(211);
  auto geo = MetricGeometry::euclidean(3, 6);
  for (int trial = 0; trial < 5; ++trial) {
    Jet f = random_polynomial(rng, 2, 6, 0.5, 0.5, true, false);
    Jet s0 = graph_levelset(f, 6);
    DefiningFunction s = unit_improve(s0, *geo, 1);

    // reference: s1 = (s/|grad s|) (1 - (1/2) s (fx^2 fxx + 2 fx fy fxy + fy^2 fyy) / w^2),
    // w = 1 + fx^2 + fy^2, lifted to ambient variables
    std::vector<Jet> lift;
    for (int i = 0; i < 2; ++i) lift.push_back(Jet::variable(3, 6, i));
    auto L = [&](const Jet& q) { return jet_substitute(q.extended(6), lift); };
    Jet fx = f.derivative(0), fy = f.derivative(1);
    Jet fxx = fx.derivative(0), fxy = fx.derivative(1), fyy = fy.derivative(1);
    Jet w = L(fx * fx) + L(fy * fy) + 1.0;
    Jet num = L(fx * fx * fxx) + 2.0 * L(fx * fy * fxy) + L(fy * fy * fyy);
    Jet sref = s0 * jet_reciprocal(jet_sqrt(w)).extended(6);
    sref = sref * (Jet::constant(3, 6, 1.0) -
                   0.5 * (s0.truncated(4) * num * jet_reciprocal(w * w)).extended(6));

    // both satisfy |grad s|^2 = 1 + O(s^2); they agree through order s^2
    // (compare inside the degree range where sref is exact)
    AdaptedCoords ad(s.s);
    Jet diff = ad.to_adapted(s.s - sref.truncated(s.s.order()));
    double m = 0.0;
    const auto& tab = diff.table();
    for (int p = 0; p < diff.size(); ++p)
      if (tab.exponents(p)[2] <= 2 && tab.degree(p) <= 5) m = std::max(m, std::abs(diff[p]));
    CHECK(m < 1e-12);
  }
}

TEST_CASE("unit_improve: random data, curved metric, order 4") {
  Rng rng(223);
  for (int d = 3; d <= 4; ++d) {
    auto geo = random_metric(rng, d, 7);
    Jet s0 = random_scaled_defining_function(rng, d, 7);
    DefiningFunction s = unit_improve(s0, *geo, 4);
    CHECK(s.improvement_order >= 4);
    Jet r = grad_norm2(*geo, s.s) - 1.0;
    AdaptedCoords ad(s.s);
    Jet rt = ad.to_adapted(r);
    double m = 0.0;
    const auto& tab = rt.table();
    for (int p = 0; p < rt.size(); ++p)
      if (tab.exponents(p)[d - 1] < 5) m = std::max(m, std::abs(rt[p]));
    CHECK(m < 1e-10);
  }
}

TEST_CASE("frame: plane and sphere") {
  auto geo = MetricGeometry::euclidean(3, 6);
  DefiningFunction plane = unit_improve(Jet::variable(3, 6, 2), *geo, 3);
  HypersurfaceFrame pf = second_fundamental_form(plane, geo);
  CHECK(pf.H == doctest::Approx(0.0));
  for (double v : pf.II) CHECK(std::abs(v) < 1e-14);

  double r = 1.6;
  DefiningFunction sph = unit_improve(sphere_levelset(3, 6, r), *geo, 3);
  HypersurfaceFrame sf = second_fundamental_form(sph, geo);
  CHECK(sf.H == doctest::Approx(1.0 / r).epsilon(1e-11));
  for (double v : sf.IIo) CHECK(std::abs(v) < 1e-11);
  CHECK(sf.K < 1e-20);
}

TEST_CASE("frame: graph mean curvature matches the closed formula") {
  Rng rng(227);
  auto geo = MetricGeometry::euclidean(3, 5);
  for (int trial = 0; trial < 10; ++trial) {
    Jet f = random_polynomial(rng, 2, 5, 0.6, 0.5, true, false);
    DefiningFunction s = unit_improve(graph_levelset(f, 5), *geo, 1);
    HypersurfaceFrame fr = second_fundamental_form(s, geo);
    CHECK(residual(fr.H, graph_mean_curvature_formula(f)) < 1e-11);
  }
}

TEST_CASE("intrinsic geometry: plane is flat, sphere has Scbar = 2/r^2") {
  auto geo = MetricGeometry::euclidean(3, 6);
  DefiningFunction plane = unit_improve(Jet::variable(3, 6, 2), *geo, 3);
  IntrinsicGeometry pi = intrinsic_geometry(second_fundamental_form(plane, geo));
  CHECK(pi.geo->scal().max_abs() < 1e-13);

  double r = 1.3;
  DefiningFunction sph = unit_improve(sphere_levelset(3, 6, r), *geo, 3);
  IntrinsicGeometry si = intrinsic_geometry(second_fundamental_form(sph, geo));
  CHECK(si.geo->scal().value() == doctest::Approx(2.0 / (r * r)).epsilon(1e-9));
}

TEST_CASE("fialkow tensor: plane and round sphere vanish in d = 4") {
  auto geo = MetricGeometry::euclidean(4, 6);
  DefiningFunction plane = unit_improve(Jet::variable(4, 6, 3), *geo, 3);
  IntrinsicGeometry pi = intrinsic_geometry(second_fundamental_form(plane, geo));
  CHECK(pi.fialkow().max_abs_value() < 1e-13);

  DefiningFunction sph = unit_improve(sphere_levelset(4, 6, 1.4), *geo, 3);
  IntrinsicGeometry si = intrinsic_geometry(second_fundamental_form(sph, geo));
  CHECK(si.fialkow().max_abs_value() < 1e-10);
  CHECK(std::abs(si.rigidity_L().value()) < 1e-10);
}

TEST_CASE("fialkow-gauss trace identity on random d = 4 surfaces") {
  Rng rng(229);
  for (int trial = 0; trial < 3; ++trial) {
    auto geo = random_metric(rng, 4, 6);
    Jet s0 = random_graph_defining_function(rng, 4, 6);
    DefiningFunction s = unit_improve(s0, *geo, 3);
    HypersurfaceFrame fr = second_fundamental_form(s, geo);
    IntrinsicGeometry intr = intrinsic_geometry(fr);
    const int d = 4, n = 3;

    // IIo^2_{ij} - gbar_{ij} K / (2(d-2)) - (W_{cabd} n^c n^d)_{ij} = (d-3) F_{ij}
    TensorField F = intr.fialkow();
    double m = 0.0, scale = 1.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double iio2 = 0.0;
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            iio2 += intr.IIo.at({i, k}).value() * intr.geo->ginv(k, l).value() *
                    intr.IIo.at({l, j}).value();
        double w = 0.0;
        for (int c = 0; c < d; ++c)
          for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
              for (int e = 0; e < d; ++e)
                w += geo->weyl(c, a, b, e).value() * fr.nhat_up[c] * fr.nhat_up[e] *
                     intr.jac[a * n + i].value() * intr.jac[b * n + j].value();
        double lhs = iio2 - 0.5 * intr.geo->g(i, j).value() * fr.K / (d - 2) - w;
        double rhs = (d - 3) * F.at({i, j}).value();
        scale = std::max(scale, std::abs(rhs));
        m = std::max(m, std::abs(lhs - rhs));
      }
    CHECK(m / scale < 1e-9);
  }
}

TEST_CASE("riemannian identity suite: flat plane exactly, random instances to tolerance") {
  auto geo = MetricGeometry::euclidean(3, 6);
  DefiningFunction plane = unit_improve(Jet::variable(3, 6, 2), *geo, 4);
  HypersurfaceFrame pf = second_fundamental_form(plane, geo);
  Report flat = riemannian_identity_suite(pf, intrinsic_geometry(pf), 1e-12);
  CHECK(flat.all_pass());

  Rng rng(233);
  for (int d = 3; d <= 4; ++d) {
    // flat ambient, random graph
    auto e = MetricGeometry::euclidean(d, 6);
    Jet s0 = random_graph_defining_function(rng, d, 6);
    DefiningFunction s = unit_improve(s0, *e, 4);
    HypersurfaceFrame fr = second_fundamental_form(s, e);
    Report r1 = riemannian_identity_suite(fr, intrinsic_geometry(fr), 1e-9);
    INFO(r1.table());
    CHECK(r1.all_pass());

    // curved ambient
    auto g = random_metric(rng, d, 6);
    DefiningFunction sc = unit_improve(random_graph_defining_function(rng, d, 6), *g, 4);
    HypersurfaceFrame frc = second_fundamental_form(sc, g);
    Report r2 = riemannian_identity_suite(frc, intrinsic_geometry(frc), 1e-8);
    INFO(r2.table());
    CHECK(r2.all_pass());
  }
}

TEST_CASE("conformal covariance of the unit conormal, IIo, and the H law") {
  Rng rng(239);
  for (int d = 3; d <= 4; ++d) {
    auto geo = random_metric(rng, d, 6);
    Jet omega = random_conformal_factor(rng, d, 6);
    auto resc = geo->rescaled(omega);
    Jet s0 = random_graph_defining_function(rng, d, 6);

    HypersurfaceFrame fg = second_fundamental_form(unit_improve(s0, *geo, 2), geo);
    HypersurfaceFrame fo = second_fundamental_form(unit_improve(s0, *resc, 2), resc);

    double om = omega.value();
    double m = 0.0;
    for (int a = 0; a < d; ++a) m = std::max(m, std::abs(fo.nhat[a] - om * fg.nhat[a]));
    CHECK(m < 1e-10);

    m = 0.0;
    double scale = 1.0;
    for (int i = 0; i < d * d; ++i) {
      m = std::max(m, std::abs(fo.IIo[i] - om * fg.IIo[i]));
      scale = std::max(scale, std::abs(fg.IIo[i]));
    }
    CHECK(m / scale < 1e-9);

    // H(Omega^2 g) = Omega^{-1} (H + nhat . Upsilon); see docs/conventions.md
    double ndotu = 0.0;
    for (int a = 0; a < d; ++a) ndotu += fg.nhat_up[a] * (omega.derivative(a).value() / om);
    double want = (fg.H + ndotu) / om;
    CHECK(residual(fo.H, want) < 1e-9);
  }
}

TEST_CASE("unit_improve error paths") {
  auto geo = MetricGeometry::euclidean(3, 4);
  CHECK_THROWS_AS(unit_improve(Jet::variable(3, 4, 2), *geo, 3), std::invalid_argument);
  CHECK_THROWS_AS(unit_improve(Jet::constant(3, 4, 1.0), *geo, 1), std::invalid_argument);
  CHECK_THROWS_AS(unit_improve(Jet::variable(3, 4, 2) * Jet::variable(3, 4, 2), *geo, 1),
                  std::domain_error);
}
