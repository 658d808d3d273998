#include "chc/laplacians.hpp"

#include <cmath>
#include <stdexcept>

#include "chc/random_instances.hpp"

namespace chc {

namespace {

// raised IIo at the base point
std::vector<double> iio_up(const HypersurfaceFrame& f) {
  const int d = f.dim();
  std::vector<double> up(d * d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          up[a * d + b] +=
              f.geo->ginv(a, c).value() * f.geo->ginv(b, e).value() * f.IIo[c * d + e];
  return up;
}

TractorField random_section(Rng& rng, std::shared_ptr<const MetricGeometry> geo, int trank,
                            double weight, int order) {
  TractorField T(geo, trank, 0, weight, order);
  for (Jet& j : T.c) j = random_polynomial(rng, geo->dim(), order, 1.0, 0.5, false);
  return T;
}

}  // namespace

TractorField ExtrinsicLaplacian::apply(const TractorField& V) const {
  if (std::abs(V.weight - domain_weight()) > 1e-12)
    throw std::invalid_argument("ExtrinsicLaplacian: input weight must be (k-d+1)/2 = " +
                                std::to_string(domain_weight()) + ", got " +
                                std::to_string(V.weight));
  Jet i2_inv = jet_reciprocal(sd.I2);
  TractorField out = V;
  for (int step = 0; step < k; ++step) {
    out = i_dot_D(sd, out) * (-1.0);
    out = out * i2_inv;
  }
  return out;
}

ExtrinsicLaplacian build_Pk(const YamabeContext& ctx, int k) {
  const int d = ctx.geo->dim();
  if (k < 1) throw std::invalid_argument("build_Pk: k must be >= 1");
  if (ctx.dd.improvement_order < std::min(k + 1, d))
    throw std::invalid_argument("build_Pk: sigma must be improved to order >= k+1");
  ExtrinsicLaplacian P;
  P.k = k;
  P.sd = ScaleData::make(ctx.geo, ctx.dd.sigma);
  P.beyond_canonical = k > d - 1;
  return P;
}

double tangentiality_residual(const YamabeContext& ctx, int k, unsigned seed, int sections) {
  ExtrinsicLaplacian P = build_Pk(ctx, k);
  Rng rng(seed);
  const int N = ctx.dd.sigma.order();
  double worst = 0.0;
  for (int s = 0; s < sections; ++s) {
    TractorField T = random_section(rng, ctx.geo, 1, P.domain_weight() - 1.0, N);
    TractorField sT = T * ctx.dd.sigma;
    sT.weight = P.domain_weight();
    TractorField out = P.apply(sT);
    double scale = 1.0;
    for (const Jet& j : out.c) scale = std::max(scale, j.max_abs());
    worst = std::max(worst, out.max_abs_value() / scale);
  }
  return worst;
}

double laplace_tangentiality_residual(const YamabeContext& ctx, unsigned seed, int sections) {
  Rng rng(seed);
  const int N = ctx.dd.sigma.order();
  double worst = 0.0;
  for (int s = 0; s < sections; ++s) {
    TractorField T = random_section(rng, ctx.geo, 1, -0.5, N);
    TractorField sT = T * ctx.dd.sigma;
    sT.weight = T.weight + 1.0;
    TractorField out = tractor_laplace(sT);
    double scale = 1.0;
    for (const Jet& j : out.c) scale = std::max(scale, j.max_abs());
    worst = std::max(worst, out.max_abs_value() / scale);
  }
  return worst;
}

std::vector<double> P2_closed(const YamabeContext& ctx, const TractorField& V) {
  const int d = ctx.geo->dim();
  if (std::abs(V.weight - (3.0 - d) / 2.0) > 1e-12)
    throw std::invalid_argument("P2_closed: input weight must be (3-d)/2");
  ScaleData sd = ScaleData::make(ctx.geo, ctx.dd.sigma);
  TractorField lap = tangential_laplace(sd, V);
  double jbar = ctx.intr.geo->jj().value();
  double shift = (3.0 - d) / 2.0 * (jbar - ctx.frame.K / (2.0 * (d - 2)));
  std::vector<double> out(lap.tsize());
  for (int i = 0; i < lap.tsize(); ++i) out[i] = lap.c[i].value() + shift * V.c[i].value();
  return out;
}

std::vector<double> yamabe_top(const YamabeContext& ctx, const TractorField& V) {
  return P2_closed(ctx, V);
}

P3Forms make_P3_forms(const YamabeContext& ctx, int order) {
  const int d = ctx.geo->dim();
  const int n = d - 1;
  if (d < 4) throw std::domain_error("P3 forms need dimension >= 4");
  P3Forms F;
  F.ctx = &ctx;
  F.sd = ScaleData::make(ctx.geo, ctx.dd.sigma);
  F.omega = tractor_curvature(ctx.geo, order);
  F.iio_up = iio_up(ctx.frame);
  F.divIIo_up.assign(d, 0.0);
  TensorField divIIo = ctx.intr.div_IIo();
  for (int a = 0; a < d; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        F.divIIo_up[a] += ctx.intr.jac[a * n + i].value() * ctx.intr.geo->ginv(i, j).value() *
                          divIIo.c[j].value();
  double divdiv = ctx.intr.div_div_IIo().value();
  double pbar = full_contraction(ctx.intr.IIo, ctx.intr.geo->schouten_field()).value();
  F.Lsc = ctx.intr.rigidity_L().value();
  F.corner_closed = divdiv - (d - 4) * pbar + (d - 2) * F.Lsc;
  F.corner_inv = (divdiv + (d - 2) * pbar) / ((d - 2.0) * (d - 3.0));
  F.pdot = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      F.pdot += F.iio_up[a * d + b] * ctx.geo->schouten(a, b).value();
  return F;
}

std::vector<double> P3Forms::closed(const TractorField& V) const {
  const int d = ctx->geo->dim();
  const int S = d + 2;
  if (std::abs(V.weight - (4.0 - d) / 2.0) > 1e-12)
    throw std::invalid_argument("P3_closed: input weight must be (4-d)/2");
  const HypersurfaceFrame& f = ctx->frame;
  const int ts = V.tsize();

  TractorField tg = tangential_grad(sd, V);
  TractorField tg2 = tangential_grad(sd, tg);
  double cfac = -0.5 * (2.0 - d / 2.0) / (d - 3.0) * corner_closed;

  // F_{ab} = Omega_{ab}# V and its coupled derivative, for the
  // (grad^b R#_{ab}) V term
  TractorField Fab(ctx->geo, 1, 2, V.weight, V.order);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int s = 0; s < S; ++s) {
        Jet acc2(d, V.order);
        for (int t = 0; t < S; ++t)
          acc2 += omega[((a * d + b) * S + s) * S + t] * V.c[t];
        Fab.at({a, b}, {s}) = std::move(acc2);
      }
  TractorField gF = tractor_connection(Fab);
  TractorField gV = tractor_connection(V);

  std::vector<double> out(ts, 0.0);
  for (int kk = 0; kk < ts; ++kk) {
    double acc = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        acc += iio_up[a * d + b] * tg2.c[(a * d + b) * ts + kk].value();
    for (int b = 0; b < d; ++b) acc += divIIo_up[b] * tg.c[b * ts + kk].value();
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int t = 0; t < S; ++t)
            acc -= f.nhat_up[a] * ctx->geo->ginv(b, c).value() *
                   omega[((a * d + c) * S + kk) * S + t].value() * tg.c[b * ts + t].value();
    double term = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c) {
          term += f.nhat_up[a] * ctx->geo->ginv(b, c).value() * gF.at({b, a, c}, {kk}).value();
          for (int t = 0; t < S; ++t)
            term -= f.nhat_up[a] * ctx->geo->ginv(b, c).value() *
                    omega[((a * d + c) * S + kk) * S + t].value() * gV.at({b}, {t}).value();
        }
    acc -= 0.5 * term;
    acc += cfac * V.c[kk].value();
    out[kk] = -8.0 * acc;
  }
  return out;
}

std::vector<double> P3Forms::invariant(const TractorField& V) const {
  const int d = ctx->geo->dim();
  const int S = d + 2;
  const HypersurfaceFrame& f = ctx->frame;
  const int ts = V.tsize();
  const double w = V.weight;  // 2 - d/2

  TractorField tg = tangential_grad(sd, V);
  TractorField inner = tg;
  for (int b = 0; b < d; ++b)
    for (int kk = 0; kk < ts; ++kk)
      inner.at({b}, {kk}) += w * sd.n_cov[b].truncated(inner.order) *
                             (-sd.rho.truncated(inner.order)) * V.c[kk].truncated(inner.order);
  TractorField touter = tangential_grad(sd, inner);

  TractorField M(ctx->geo, 1, 2, w, V.order);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int s = 0; s < S; ++s) {
        Jet acc2(d, V.order);
        for (int t = 0; t < S; ++t)
          acc2 += omega[((a * d + b) * S + s) * S + t] * V.c[t];
        M.at({a, b}, {s}) = std::move(acc2);
      }
  TractorField gM = tangential_grad(sd, M);

  std::vector<double> out(ts, 0.0);
  for (int kk = 0; kk < ts; ++kk) {
    double lterm = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) lterm += iio_up[a * d + b] * touter.at({a, b}, {kk}).value();
    lterm += w * pdot * V.c[kk].value();
    for (int a = 0; a < d; ++a) lterm += divIIo_up[a] * tg.c[a * ts + kk].value();
    lterm += (corner_inv + Lsc / (d - 3.0)) * (1.0 - d / 2.0) * (2.0 - d / 2.0) *
             V.c[kk].value();

    double rterm = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int t = 0; t < S; ++t)
            rterm += f.nhat_up[a] * ctx->geo->ginv(b, c).value() *
                     omega[((a * d + c) * S + kk) * S + t].value() * tg.c[b * ts + t].value();
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          rterm += f.nhat_up[a] * ctx->geo->ginv(c, b).value() * gM.at({c, a, b}, {kk}).value();

    out[kk] = -8.0 * lterm + 4.0 * rterm - 4.0 * (d - 4) * Lsc * V.c[kk].value();
  }
  return out;
}

std::vector<double> P3_closed(const YamabeContext& ctx, const TractorField& V) {
  return make_P3_forms(ctx, V.order).closed(V);
}

std::vector<double> P3_invariant_form(const YamabeContext& ctx, const TractorField& V) {
  return make_P3_forms(ctx, V.order).invariant(V);
}

Report laplacian_suite(const YamabeContext& ctx, unsigned seed, int sections, double tol) {
  Report rep;
  rep.command = "laplacians";
  const int d = ctx.geo->dim();
  const int N = ctx.dd.sigma.order();
  Rng rng(seed);

  // holographic vs closed P2
  {
    ExtrinsicLaplacian P2 = build_Pk(ctx, 2);
    double m = 0.0;
    for (int s = 0; s < sections; ++s) {
      TractorField V = random_section(rng, ctx.geo, 1, P2.domain_weight(), N);
      TractorField holo = P2.apply(V);
      std::vector<double> closed = P2_closed(ctx, V);
      double scale = 1.0;
      for (double v : closed) scale = std::max(scale, std::abs(v));
      for (int i = 0; i < holo.tsize(); ++i)
        m = std::max(m, std::abs(holo.c[i].value() - closed[i]) / scale);
    }
    rep.add("P2_holographic_vs_closed", m, tol);
    rep.add("P2_tangentiality", tangentiality_residual(ctx, 2, seed + 1), std::max(tol, 1e-9));
  }

  // boundary Yamabe operator equals (I.D)^2 at weight (3-d)/2
  {
    ScaleData sd = ScaleData::make(ctx.geo, ctx.dd.sigma);
    double m = 0.0;
    for (int s = 0; s < std::min(sections, 5); ++s) {
      TractorField V = random_section(rng, ctx.geo, 1, (3.0 - d) / 2.0, N);
      TractorField idd2 = i_dot_D(sd, i_dot_D(sd, V));
      std::vector<double> top = yamabe_top(ctx, V);
      double scale = 1.0;
      for (double v : top) scale = std::max(scale, std::abs(v));
      for (int i = 0; i < idd2.tsize(); ++i)
        m = std::max(m, std::abs(idd2.c[i].value() - top[i]) / scale);
    }
    rep.add("yamabe_top_vs_ID_squared", m, tol);
  }

  if (d >= 4) {
    ExtrinsicLaplacian P3 = build_Pk(ctx, 3);
    P3Forms forms = make_P3_forms(ctx, N);
    double m = 0.0, mi = 0.0;
    for (int s = 0; s < sections; ++s) {
      TractorField V = random_section(rng, ctx.geo, 1, P3.domain_weight(), N);
      TractorField holo = P3.apply(V);
      std::vector<double> closed = forms.closed(V);
      std::vector<double> inv = forms.invariant(V);
      double scale = 1.0;
      for (double v : closed) scale = std::max(scale, std::abs(v));
      for (int i = 0; i < holo.tsize(); ++i) {
        m = std::max(m, std::abs(holo.c[i].value() - closed[i]) / scale);
        mi = std::max(mi, std::abs(inv[i] - closed[i]) / scale);
      }
    }
    rep.add("P3_holographic_vs_closed", m, tol);
    rep.add("P3_invariant_vs_closed", mi, tol);
    rep.add("P3_tangentiality", tangentiality_residual(ctx, 3, seed + 2), std::max(tol, 1e-9));
  }

  // negative control: the plain Laplacian is far from tangential
  {
    double r = laplace_tangentiality_residual(ctx, seed + 3);
    rep.add("negative_control_plain_laplacian", r >= 1e-2 ? 0.0 : 1.0, 0.5);
  }

  // weight ledger is structural
  {
    bool threw = false;
    try {
      ExtrinsicLaplacian P2 = build_Pk(ctx, 2);
      TractorField V = random_section(rng, ctx.geo, 1, P2.domain_weight() + 1.0, N);
      P2.apply(V);
    } catch (const std::invalid_argument&) {
      threw = true;
    }
    rep.add("weight_ledger_rejects_mismatch", threw ? 0.0 : 1.0, 0.5);
  }

  return rep;
}

}  // namespace chc
