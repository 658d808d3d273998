#include <cmath>

#include "chc/laplacians.hpp"
#include "chc/random_instances.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace chc;

namespace {

YamabeContext random_ctx(Rng& rng, int d, int order, bool curved) {
  auto geo = curved ? random_metric(rng, d, order) : MetricGeometry::euclidean(d, order);
  Jet s0 = random_graph_defining_function(rng, d, order);
  return make_context(s0, geo, std::min(d, order - 2), 3);
}

}  // namespace

TEST_CASE("umbilic flat: P2 reduces to the intrinsic Laplacian on densities") {
  for (int d = 3; d <= 4; ++d) {
    auto geo = MetricGeometry::euclidean(d, 7);
    YamabeContext ctx = make_context(Jet::variable(d, 7, d - 1), geo, std::min(d, 5), 3);
    ExtrinsicLaplacian P2 = build_Pk(ctx, 2);
    Rng rng(77);
    for (int t = 0; t < 3; ++t) {
      TractorField V(ctx.geo, 0, 0, P2.domain_weight(), 7);
      V.c[0] = random_polynomial(rng, d, 7, 1.0, 0.5, false);
      double got = P2.apply(V).c[0].value();
      double want = laplacian(*ctx.intr.geo, ctx.intr.pullback_scalar(V.c[0])).value();
      CHECK(testutil::residual(got, want) < 1e-9);
    }
  }
}

TEST_CASE("GJMS degeneration: P4 on an umbilic flat plane is 9 x the squared Laplacian") {
  // the holographic power normalizes P_k as ((k-1)!!)^2 Delta-bar^{k/2} on
  // umbilic flats: 1 for k = 2, 9 for k = 4 (verified by expanding the flat
  // recursion by hand)
  auto geo = MetricGeometry::euclidean(5, 8);
  YamabeContext ctx = make_context(Jet::variable(5, 8, 4), geo, 5, 3);
  ExtrinsicLaplacian P4 = build_Pk(ctx, 4);
  Rng rng(79);
  TractorField V(ctx.geo, 0, 0, P4.domain_weight(), 8);
  V.c[0] = random_polynomial(rng, 5, 8, 1.0, 0.5, false);
  double got = P4.apply(V).c[0].value();
  Jet fbar = ctx.intr.pullback_scalar(V.c[0]);
  double want = 9.0 * laplacian(*ctx.intr.geo, laplacian(*ctx.intr.geo, fbar)).value();
  CHECK(testutil::residual(got, want) < 1e-9);
}

TEST_CASE("laplacian suite on random instances") {
  Rng rng(81);
  for (int d = 3; d <= 4; ++d) {
    for (bool curved : {false, true}) {
      YamabeContext ctx = random_ctx(rng, d, d == 3 ? 6 : 7, curved);
      Report r = laplacian_suite(ctx, 900 + d, 6, 1e-8);
      INFO("d = ", d, " curved = ", curved, "\n", r.table());
      CHECK(r.all_pass());
    }
  }
}

TEST_CASE("N . P2 N = -K in d = 3") {
  Rng rng(83);
  for (int t = 0; t < 3; ++t) {
    YamabeContext ctx = random_ctx(rng, 3, 6, true);
    ScaleData sd = ScaleData::make(ctx.geo, ctx.dd.sigma);
    ExtrinsicLaplacian P2 = build_Pk(ctx, 2);
    TractorField I = scale_tractor(sd, ctx.dd.sigma.order() - 2);
    TractorField PI = P2.apply(I);
    // pairing at the base point with N = I|_Sigma
    double got = 0.0;
    got += I.c[0].value() * PI.c[4].value() + I.c[4].value() * PI.c[0].value();
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        got += ctx.geo->ginv(a, b).value() * I.c[1 + a].value() * PI.c[1 + b].value();
    CHECK(testutil::residual(got, -ctx.frame.K) < 1e-8);
  }
}

TEST_CASE("conformal covariance of N . P_{d-1} N (weight 1-d scalar)") {
  Rng rng(87);
  for (int d = 3; d <= 4; ++d) {
    auto geo = MetricGeometry::euclidean(d, d + 3);
    Jet s0 = random_graph_defining_function(rng, d, d + 3);
    Jet omega = random_conformal_factor(rng, d, d + 3);
    auto resc = geo->rescaled(omega);

    auto np_n = [&](std::shared_ptr<const MetricGeometry> g, const Jet& start) {
      YamabeContext ctx = make_context(start, g, std::min(d, d + 1), 3);
      ScaleData sd = ScaleData::make(ctx.geo, ctx.dd.sigma);
      ExtrinsicLaplacian P = build_Pk(ctx, d - 1);
      TractorField I = scale_tractor(sd);
      TractorField PI = P.apply(I);
      double got = I.c[0].value() * PI.c[d + 1].value() + I.c[d + 1].value() * PI.c[0].value();
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          got += g->ginv(a, b).value() * I.c[1 + a].value() * PI.c[1 + b].value();
      return got;
    };

    double flat = np_n(geo, s0);
    double curved = np_n(resc, s0);
    CHECK(testutil::residual(curved, std::pow(omega.value(), 1.0 - d) * flat) < 1e-8);
  }
}
