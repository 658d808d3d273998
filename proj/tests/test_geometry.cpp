#include <cmath>
#include <random>

#include "chc/expression.hpp"
#include "chc/geometry.hpp"
#include "chc/random_instances.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace chc;
using testutil::jet_residual;

namespace {

// Round-sphere metric of radius r pulled back in the chart (theta, phi)
// around an interior point; Sc must be d(d-1)/r^2 with d = 2.
std::shared_ptr<const MetricGeometry> sphere_chart_metric(double r, int order) {
  auto names = std::vector<std::string>{"x", "y"};
  Expression g11 = Expression::parse(std::to_string(r * r), names);
  Expression g22 = Expression::parse(std::to_string(r * r) + "*sin(x)^2", names);
  double base[] = {1.1, 0.4};
  std::vector<Jet> g(4, Jet(2, order));
  g[0] = g11.evaluate(base, order);
  g[3] = g22.evaluate(base, order);
  return MetricGeometry::make(std::move(g));
}

double bianchi1_residual(const MetricGeometry& geo) {
  // R_{a[bcd]} = 0: check R_{abcd} + R_{acdb} + R_{adbc} at the base point
  double m = 0.0;
  int d = geo.dim();
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          Jet s = geo.riemann(a, b, c, e) + geo.riemann(a, c, e, b) + geo.riemann(a, e, b, c);
          m = std::max(m, s.max_abs());
        }
  return m;
}

}  // namespace

TEST_CASE("euclidean geometry is flat") {
  auto geo = MetricGeometry::euclidean(3, 4);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      CHECK(geo->ricci(a, b).max_abs() == 0.0);
      CHECK(geo->schouten(a, b).max_abs() == 0.0);
    }
  CHECK(geo->jj().max_abs() == 0.0);
}

TEST_CASE("round sphere chart has constant scalar curvature d(d-1)/r^2") {
  double r = 1.7;
  auto geo = sphere_chart_metric(r, 5);
  Jet sc = geo->scal();
  CHECK(sc.value() == doctest::Approx(2.0 / (r * r)).epsilon(1e-10));
  // constancy: derivatives vanish
  CHECK(sc.max_abs_at_degree(1) < 1e-10);
  CHECK(sc.max_abs_at_degree(2) < 1e-9);
}

TEST_CASE("first and second Bianchi identities for random analytic metrics") {
  Rng rng(101);
  for (int d = 3; d <= 4; ++d) {
    auto geo = random_metric(rng, d, 5);
    CHECK(bianchi1_residual(*geo) < 1e-10);

    // second Bianchi: nabla_{[a} R_{bc]de} = 0
    TensorField R(*geo, 4, geo->curvature_order());
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) R.at({a, b, c, e}) = geo->riemann(a, b, c, e);
    TensorField DR = covariant_derivative(R);
    double m = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e)
            for (int f = 0; f < d; ++f) {
              Jet s = DR.at({a, b, c, e, f}) + DR.at({b, c, a, e, f}) + DR.at({c, a, b, e, f});
              m = std::max(m, s.max_abs());
            }
    CHECK(m < 1e-10);
  }
}

TEST_CASE("metricity: nabla g = 0 on all retained degrees") {
  Rng rng(103);
  auto geo = random_metric(rng, 4, 5);
  TensorField g = geo->metric_field(geo->order());
  TensorField Dg = covariant_derivative(g);
  double m = 0.0;
  for (const Jet& j : Dg.c) m = std::max(m, j.max_abs());
  CHECK(m < 1e-11);
}

TEST_CASE("schouten decomposition: trace, reassembly, conformally flat Weyl") {
  Rng rng(107);
  for (int d = 3; d <= 4; ++d) {
    auto geo = random_metric(rng, d, 5);

    // J = P^a_a
    Jet trP(d, geo->curvature_order());
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) trP += geo->ginv(a, b) * geo->schouten(a, b);
    CHECK(jet_residual(trP, geo->jj()) < 1e-12);

    // Riemann reassembled from W, P, g
    double m = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) {
            Jet want = geo->weyl(a, b, c, e) + geo->schouten(a, c) * geo->g(b, e) -
                       geo->schouten(b, c) * geo->g(a, e) + geo->schouten(b, e) * geo->g(a, c) -
                       geo->schouten(a, e) * geo->g(b, c);
            m = std::max(m, (want - geo->riemann(a, b, c, e)).max_abs());
          }
    CHECK(m < 1e-10);

    // Weyl is totally trace-free
    TensorField W(*geo, 4, geo->curvature_order());
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) W.at({a, b, c, e}) = geo->weyl(a, b, c, e);
    for (auto [i, j] : {std::pair{0, 2}, {0, 3}, {1, 2}, {1, 3}}) {
      TensorField tr = trace(W, i, j);
      double mm = 0.0;
      for (const Jet& jj : tr.c) mm = std::max(mm, jj.max_abs());
      CHECK(mm < 1e-10);
    }
  }

  // conformally flat metric has vanishing Weyl
  auto cf = random_conformally_flat(rng, 4, 5);
  double m = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int e = 0; e < 4; ++e) m = std::max(m, cf->weyl(a, b, c, e).max_abs());
  CHECK(m < 1e-10);
}

TEST_CASE("conformal rescale: identity, Weyl covariance, composition") {
  Rng rng(109);
  auto geo = random_metric(rng, 4, 5);

  Jet one = Jet::constant(4, 5, 1.0);
  auto same = geo->rescaled(one);
  double m = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) m = std::max(m, (same->g(a, b) - geo->g(a, b)).max_abs());
  CHECK(m == 0.0);

  // Euclidean with Omega = exp(x) stays conformally flat
  auto flat = MetricGeometry::euclidean(3, 5);
  Jet ex = jet_exp(Jet::variable(3, 5, 0));
  auto resc = flat->rescaled(ex);
  m = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int e = 0; e < 3; ++e) m = std::max(m, resc->weyl(a, b, c, e).max_abs());
  CHECK(m < 1e-11);

  // W_{abcd}(Omega^2 g) = Omega^2 W_{abcd}(g)
  Jet omega = random_conformal_factor(rng, 4, 5);
  auto curved = geo->rescaled(omega);
  Jet o2 = omega * omega;
  m = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int e = 0; e < 4; ++e)
          m = std::max(m, jet_residual(curved->weyl(a, b, c, e), o2 * geo->weyl(a, b, c, e)));
  CHECK(m < 1e-9);

  // rescale twice vs once with the product
  Jet omega2 = random_conformal_factor(rng, 4, 5);
  auto twice = curved->rescaled(omega2);
  auto once = geo->rescaled(omega * omega2);
  m = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) m = std::max(m, jet_residual(twice->g(a, b), once->g(a, b)));
  CHECK(m < 1e-11);
}

TEST_CASE("commutator action matches direct double derivatives") {
  Rng rng(113);
  auto geo = random_metric(rng, 3, 5);

  // on scalars it vanishes
  TensorField s(*geo, 0, 5);
  s.c[0] = random_polynomial(rng, 3, 5, 1.0, 0.5, false);
  TensorField dds = covariant_derivative(covariant_derivative(s));
  double m = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) m = std::max(m, (dds.at({a, b}) - dds.at({b, a})).max_abs());
  CHECK(m < 1e-11);

  // on covectors it matches the Riemann contraction
  TensorField w(*geo, 1, 5);
  for (int i = 0; i < 3; ++i) w.c[i] = random_polynomial(rng, 3, 5, 1.0, 0.5, false);
  TensorField ddw = covariant_derivative(covariant_derivative(w));
  TensorField comm = commutator_action(w);
  m = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        Jet direct = ddw.at({a, b, c}) - ddw.at({b, a, c});
        m = std::max(m, jet_residual(direct, comm.at({a, b, c})));
      }
  CHECK(m < 1e-10);

  // flat metric: commutator vanishes on any tensor
  auto flat = MetricGeometry::euclidean(3, 5);
  TensorField t(*flat, 2, 5);
  for (int i = 0; i < 9; ++i) t.c[i] = random_polynomial(rng, 3, 5, 1.0, 0.5, false);
  TensorField cf = commutator_action(t);
  m = 0.0;
  for (const Jet& j : cf.c) m = std::max(m, j.max_abs());
  CHECK(m == 0.0);
}

TEST_CASE("metric errors: non-invertible and non-symmetric input") {
  std::vector<Jet> g(4, Jet(2, 3));  // all-zero metric
  CHECK_THROWS_AS(MetricGeometry::make(std::move(g)), std::domain_error);
}
