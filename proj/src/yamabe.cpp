#include "chc/yamabe.hpp"

#include <cmath>
#include <stdexcept>

#include "chc/random_instances.hpp"

namespace chc {

namespace {

constexpr double kOrderTol = 1e-9;

double vres(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

// T_{ab} n^a n^b as a scalar jet
Jet contract_nn(const TensorField& T, const std::vector<Jet>& n_up) {
  const int d = T.dim();
  Jet out(d, std::min(T.order, n_up[0].order()));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) out += T.at({a, b}) * n_up[a] * n_up[b];
  return out;
}

// raised trace-free second fundamental form at the base point
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

double tr_iio3(const HypersurfaceFrame& f) {
  const int d = f.dim();
  std::vector<double> up = iio_up(f);
  double r = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          r += up[a * d + b] * f.IIo[b * d + c] * f.geo->ginv(c, e).value() * f.IIo[e * d + a];
  return r;
}

// IIo^{ab} R_{cabd} n^c n^d for a Riemann-like accessor
template <class Acc>
double iio_Rnn(const HypersurfaceFrame& f, Acc R) {
  const int d = f.dim();
  std::vector<double> up = iio_up(f);
  double r = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          r += up[a * d + b] * R(c, a, b, e) * f.nhat_up[c] * f.nhat_up[e];
  return r;
}

double iio_dot_tensor(const HypersurfaceFrame& f, const TensorField& T) {
  const int d = f.dim();
  std::vector<double> up = iio_up(f);
  double r = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) r += up[a * d + b] * T.at({a, b}).value();
  return r;
}

}  // namespace

Jet s_functional(const MetricGeometry& geo, const Jet& sigma) {
  const int d = geo.dim();
  const int N = sigma.order();
  if (N < 2) throw std::invalid_argument("s_functional: jet order must be >= 2");
  Jet inner = laplacian(geo, sigma) + geo.jj() * sigma;  // order N-2
  // when sigma vanishes at the base point, sigma (Delta + J) sigma is exact
  // to order N-1
  if (std::abs(sigma.value()) < 1e-12)
    return grad_norm2(geo, sigma) -
           (2.0 / d) * jet_multiply(sigma.truncated(N - 1), inner.extended(N - 1));
  return grad_norm2(geo, sigma) - (2.0 / d) * (sigma * inner);
}

Jet rho_of(const MetricGeometry& geo, const Jet& sigma) {
  Jet inner = laplacian(geo, sigma) + geo.jj() * sigma;
  return inner * (-1.0 / geo.dim());
}

DefiningDensity conformal_unit_improve(const Jet& sigma0, const MetricGeometry& geo,
                                       int target_order) {
  const int d = geo.dim();
  const int N = sigma0.order();
  if (target_order > d)
    throw std::domain_error(
        "conformal_unit_improve: improvement beyond order d = " + std::to_string(d) +
        " is obstructed; the order-d residual of S is the obstruction density");
  if (N < target_order + 2)
    throw std::invalid_argument("conformal_unit_improve: jet order must be >= target + 2");
  if (std::abs(sigma0.value()) > 1e-9)
    throw std::invalid_argument("conformal_unit_improve: sigma does not vanish at the base point");

  Jet S0 = s_functional(geo, sigma0);
  if (S0.value() <= 0.0)
    throw std::domain_error("conformal_unit_improve: S(g, sigma0) <= 0 at the base point");
  Jet sigma = jet_multiply(sigma0, jet_reciprocal(jet_sqrt(S0)).extended(N));

  DefiningDensity out;
  out.alpha.assign(std::max(1, d), 0.0);

  Jet r = s_functional(geo, sigma) - 1.0;
  AdaptedCoords ad(sigma);
  for (int guard = 0; guard <= target_order + 2; ++guard) {
    double below = 0.0;
    int k = ad.vanishing_order(r, kOrderTol, &below);
    if (k >= target_order || k >= d) {
      out.sigma = sigma;
      out.rho = rho_of(geo, sigma);
      out.improvement_order = std::min(k, d);
      if (k >= d && r.order() >= d) {
        out.B = ad.divide(r, d);
        out.B_base = out.B->value();
      }
      return out;
    }

    Jet alpha = ad.slice_coefficient(r, k) * (-double(d) / (2.0 * (k + 1) * (d - k)));
    out.alpha[k] = alpha.value();
    Jet snew = sigma + jet_multiply(jet_powi(sigma, k + 1), alpha.extended(N));

    Jet rnew = s_functional(geo, snew) - 1.0;
    AdaptedCoords adnew(snew);
    int knew = adnew.vanishing_order(rnew, kOrderTol);
    if (knew <= k)
      throw std::domain_error(
          "conformal_unit_improve: step failed to improve the residual order (order " +
          std::to_string(k) + ", residual " + std::to_string(below) + ")");
    sigma = std::move(snew);
    r = std::move(rnew);
    ad = std::move(adnew);
  }
  throw std::domain_error("conformal_unit_improve: no convergence within the step guard");
}

Jet euclidean_sigma_of_unit(const DefiningFunction& sfun, const MetricGeometry& geo) {
  const int d = geo.dim();
  const int N = sfun.s.order();
  const Jet& s = sfun.s;
  Jet divn = laplacian(geo, s);  // grad . n for a unit defining function
  Jet s2 = jet_powi(s, 2), s3 = jet_powi(s, 3);
  if (d == 3) {
    Jet nd = normal_derivative(geo, s, divn, 1);
    return s + 0.25 * jet_multiply(s2, divn.extended(N)) +
           (1.0 / 12.0) * jet_multiply(s3, (nd + 2.0 * divn * divn).extended(N));
  }
  if (d == 4) {
    Jet nd = normal_derivative(geo, s, divn, 1);
    Jet lap_divn = laplacian(geo, divn);
    Jet s4 = jet_powi(s, 4);
    Jet quart = 6.0 * lap_divn + 4.0 * divn * nd + (14.0 / 3.0) * divn * divn * divn;
    return s + (1.0 / 6.0) * jet_multiply(s2, divn.extended(N)) +
           (1.0 / 18.0) * jet_multiply(s3, (divn * divn).extended(N)) +
           (1.0 / 144.0) * jet_multiply(s4, quart.extended(N));
  }
  throw std::invalid_argument("euclidean_sigma_of_unit: closed forms exist for d = 3, 4 only");
}

Jet euclidean_B_of_unit(const DefiningFunction& sfun, const MetricGeometry& geo) {
  const int d = geo.dim();
  const Jet& s = sfun.s;
  Jet divn = laplacian(geo, s);
  if (d == 3) {
    Jet lap = laplacian(geo, divn);
    Jet nd1 = normal_derivative(geo, s, divn, 1);
    Jet nd2 = normal_derivative(geo, s, divn, 2);
    return (-1.0 / 12.0) * (2.0 * lap + 2.0 * nd2 + 8.0 * divn * nd1 + 3.0 * divn * divn * divn);
  }
  if (d == 4) {
    Jet lap = laplacian(geo, divn);
    Jet nd1 = normal_derivative(geo, s, divn, 1);
    Jet nd2 = normal_derivative(geo, s, divn, 2);
    Jet ndlap = normal_derivative(geo, s, lap, 1);
    Jet grad2 = grad_norm2(geo, divn);
    Jet divn2 = divn * divn;
    return (-1.0 / 108.0) *
           (9.0 * ndlap + 12.0 * divn * lap + 6.0 * divn * nd2 + 3.0 * grad2 + 6.0 * nd1 * nd1 +
            18.0 * divn2 * nd1 + 4.0 * divn2 * divn2);
  }
  throw std::invalid_argument("euclidean_B_of_unit: closed forms exist for d = 3, 4 only");
}

YamabeContext make_context(const Jet& sigma0, std::shared_ptr<const MetricGeometry> geo,
                           int target_order, int frame_order) {
  YamabeContext ctx{geo, conformal_unit_improve(sigma0, *geo, target_order), {}, {}};
  DefiningFunction unit = unit_improve(ctx.dd.sigma, *geo, frame_order);
  ctx.frame = second_fundamental_form(unit, geo);
  ctx.intr = intrinsic_geometry(ctx.frame);
  return ctx;
}

ObstructionReport obstruction_density(const YamabeContext& ctx, AmbientKind kind,
                                      double tol) {
  const int d = ctx.geo->dim();
  if (!ctx.dd.B)
    throw std::invalid_argument("obstruction_density: density is not improved to order d");
  ObstructionReport rep;
  rep.B = ctx.dd.B_base;
  rep.checks.command = "obstruction";

  if (d != 3 && d != 4) return rep;  // recursion value only; no closed forms here

  const HypersurfaceFrame& f = ctx.frame;
  const IntrinsicGeometry& intr = ctx.intr;

  if (d == 3) {
    // curved: B = -(1/3) (divdiv IIo + H K + P^top . IIo)
    double pdot = iio_dot_tensor(f, ctx.geo->schouten_field());
    double curved = -(intr.div_div_IIo().value() + f.H * f.K + pdot) / 3.0;
    rep.checks.add("curved_d3_formula", vres(rep.B, curved), tol);
    if (kind == AmbientKind::Flat) {
      double flat = -(intr.lap_H().value() + f.H * f.K) / 3.0;
      rep.checks.add("willmore_d3_formula", vres(rep.B, flat), tol);
    }
  }
  if (d == 4 && kind != AmbientKind::General) {
    double g2 = full_contraction(intr.grad_IIo(), intr.grad_IIo()).value();
    double lap = full_contraction(intr.IIo, intr.lap_IIo()).value();
    TensorField div = intr.div_IIo();
    double div2 = full_contraction(div, div).value();
    double jbar = intr.geo->jj().value();
    double quart = (g2 + 2.0 * lap + 1.5 * div2 - 2.0 * jbar * f.K + f.K * f.K) / 6.0;
    rep.checks.add("fourwill_formula", vres(rep.B, quart), tol);
  }
  return rep;
}

Report rho_ladder(const YamabeContext& ctx, double tol) {
  Report rep;
  rep.command = "rho-ladder";
  const int d = ctx.geo->dim();
  const MetricGeometry& geo = *ctx.geo;
  const HypersurfaceFrame& f = ctx.frame;
  const Jet& sigma = ctx.dd.sigma;

  rep.add("rho_is_minus_H", vres(ctx.dd.rho.value(), -f.H), tol);

  // second fundamental form from the density: grad_a n_b + rho n_a n_b = II_ab
  {
    TensorField sig(geo, 0, sigma.order());
    sig.c[0] = sigma;
    TensorField dds = covariant_derivative(covariant_derivative(sig));
    double m = 0.0, scale = 1.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double got = dds.at({a, b}).value() + ctx.dd.rho.value() * f.nhat[a] * f.nhat[b];
        m = std::max(m, std::abs(got - f.II[a * d + b]));
        scale = std::max(scale, std::abs(f.II[a * d + b]));
      }
    rep.add("gradgrad_sigma_is_II", m / scale, tol);
  }

  // grad_n n_a = H n_a along Sigma
  {
    TensorField ncov(geo, 1, sigma.order() - 1);
    for (int a = 0; a < d; ++a) ncov.c[a] = sigma.derivative(a);
    std::vector<Jet> nup = gradient_up(geo, sigma);
    TensorField nd = directional_derivative(ncov, nup);
    double m = 0.0;
    for (int a = 0; a < d; ++a) m = std::max(m, std::abs(nd.c[a].value() - f.H * f.nhat[a]));
    rep.add("normal_acceleration", m, tol);
  }

  if (d > 2) {
    double pnn = contract_nn(geo.schouten_field(), f.n_up).value();
    double got = normal_derivative(geo, sigma, ctx.dd.rho, 1).value();
    rep.add("grad_n_rho", vres(got, f.K / (d - 2) + pnn), tol);
  }

  // (1/2) grad_n^3 I^2 + (d-3) grad_n^2 rho along Sigma
  {
    Jet S = s_functional(geo, sigma);
    double lhs = 0.5 * normal_derivative(geo, sigma, S, 3).value() +
                 (d - 3) * normal_derivative(geo, sigma, ctx.dd.rho, 2).value();
    double pdot = iio_dot_tensor(f, geo.schouten_field());
    std::vector<Jet> nup_sig = gradient_up(geo, sigma);
    TensorField Gf(geo, 2, geo.curvature_order());
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) Gf.at({a, b}) = geo.einstein(a, b);
    double ndG = normal_derivative(geo, sigma, contract_nn(Gf, nup_sig), 1).value();
    double ndJ = normal_derivative(geo, sigma, geo.jj(), 1).value();
    double wterm =
        iio_Rnn(f, [&](int c, int a, int b, int e) { return geo.weyl(c, a, b, e).value(); });
    double rhs = -(ctx.intr.div_div_IIo().value() + (d - 2) * (f.H * f.K + pdot)) / (d - 2) -
                 2.0 * tr_iio3(f) + 2.0 * wterm + double(d - 3) / (d - 2) * ndG +
                 (d - 3) * (ndJ + 2.0 * f.H * geo.jj().value());
    rep.add("w3_third_normal_derivative", vres(lhs, rhs), tol);
  }
  return rep;
}

Report appendix_identity_suite(const YamabeContext& ctx, double tol) {
  Report rep;
  rep.command = "appendix-identities";
  const int d = ctx.geo->dim();
  const MetricGeometry& geo = *ctx.geo;
  const HypersurfaceFrame& f = ctx.frame;
  const Jet& sigma = ctx.dd.sigma;
  const Jet& rho = ctx.dd.rho;
  const Jet jj = geo.jj();

  std::vector<Jet> nup = gradient_up(geo, sigma);
  TensorField ncov(geo, 1, sigma.order() - 1);
  for (int a = 0; a < d; ++a) ncov.c[a] = sigma.derivative(a);

  // gamma^{ab} grad_a n_b with gamma_{ab} = g_{ab} - n_a n_b (unnormalized n)
  TensorField ddsig = covariant_derivative(ncov);
  Jet gdd = trace(ddsig, 0, 1).c[0];
  Jet div_gamma = gdd;
  {
    Jet nn(d, gdd.order());
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) nn += nup[a] * nup[b] * ddsig.at({a, b});
    div_gamma = gdd - nn;
  }

  auto gamma_trace_value = [&](const TensorField& T) {
    Jet tr_j = trace(T, 0, 1).c[0];
    Jet nn(d, T.order);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) nn += nup[a] * nup[b] * T.at({a, b});
    return (tr_j - nn).value();
  };

  // threederivs: (1/2) grad_n^3 I^2 + (d-3) grad_n^2 rho =
  //   -grad_n^2 (gamma^{ab} grad_a n_b) - grad_n (5 rho^2 + 2 J) + 4 rho^3 + 2 rho J
  {
    Jet S = s_functional(geo, sigma);
    double lhs = 0.5 * normal_derivative(geo, sigma, S, 3).value() +
                 (d - 3) * normal_derivative(geo, sigma, rho, 2).value();
    double t1 = -normal_derivative(geo, sigma, div_gamma, 2).value();
    double t2 = -normal_derivative(geo, sigma, 5.0 * rho * rho + 2.0 * jj, 1).value();
    double rhov = rho.value();
    double rhs = t1 + t2 + 4.0 * rhov * rhov * rhov + 2.0 * rhov * jj.value();
    rep.add("threederivs", vres(lhs, rhs), tol);
  }

  // Laplaces: Deltabar fbar = (Delta - grad_n^2 - (d-2) H grad_n) f
  {
    Rng rng(0x5eed);
    Jet fn = random_polynomial(rng, d, sigma.order(), 1.0, 0.5, false);
    double lhs = laplacian(*ctx.intr.geo, ctx.intr.pullback_scalar(fn)).value();
    double rhs = laplacian(geo, fn).value() - normal_derivative(geo, sigma, fn, 2).value() -
                 (d - 2) * f.H * normal_derivative(geo, sigma, fn, 1).value();
    rep.add("laplaces", vres(lhs, rhs), tol);
  }

  // leadinglaplace: gamma^{ab} grad_a grad_n^2 n_b =
  //   Deltabar H - 2(d-1) H grad_n rho + (d-1) H^3
  {
    TensorField ndd = directional_derivative(directional_derivative(ncov, nup), nup);
    TensorField grad_ndd = covariant_derivative(ndd);
    double lhs = gamma_trace_value(grad_ndd);
    double ndrho = normal_derivative(geo, sigma, rho, 1).value();
    double rhs =
        ctx.intr.lap_H().value() - 2.0 * (d - 1) * f.H * ndrho + (d - 1) * f.H * f.H * f.H;
    rep.add("leadinglaplace", vres(lhs, rhs), tol);
  }

  // commutators: grad_n^2 (gamma^{ab} grad_a n_b) - gamma^{ab} grad_n^2 grad_a n_b
  //   = 12 H grad_n rho - 4 H^3
  {
    double lhs1 = normal_derivative(geo, sigma, div_gamma, 2).value();
    TensorField nn_dds = directional_derivative(directional_derivative(ddsig, nup), nup);
    double lhs = lhs1 - gamma_trace_value(nn_dds);
    double ndrho = normal_derivative(geo, sigma, rho, 1).value();
    double rhs = 12.0 * f.H * ndrho - 4.0 * f.H * f.H * f.H;
    rep.add("commutators_gamma", vres(lhs, rhs), tol);
  }

  // commutators: gamma^{ab}(grad_n^2 grad_a n_b - grad_a grad_n^2 n_b) =
  //   -(grad_n - H) Ric(n,n) + 2 tr IIo^3 + 3 H K - (d-1) H^3 - 2 IIo^{ab} R_{cabd} n^c n^d
  {
    TensorField nn_dds = directional_derivative(directional_derivative(ddsig, nup), nup);
    TensorField ndd = directional_derivative(directional_derivative(ncov, nup), nup);
    TensorField grad_ndd = covariant_derivative(ndd);
    double lhs = gamma_trace_value(nn_dds) - gamma_trace_value(grad_ndd);
    TensorField ric = geo.ricci_field();
    Jet ricnn_field = contract_nn(ric, nup);
    double ricnn = ricnn_field.value();
    double nd_ricnn = normal_derivative(geo, sigma, ricnn_field, 1).value();
    double rterm =
        iio_Rnn(f, [&](int c, int a, int b, int e) { return geo.riemann(c, a, b, e).value(); });
    double rhs = -(nd_ricnn - f.H * ricnn) + 2.0 * tr_iio3(f) + 3.0 * f.H * f.K -
                 (d - 1) * f.H * f.H * f.H - 2.0 * rterm;
    rep.add("commutators_mixed", vres(lhs, rhs), tol);
  }

  // rhonnn: (1/2) grad_n^3 I^2 + (d-3) grad_n^2 rho =
  //   -Deltabar H - H K - 2 tr IIo^3 + grad_n G(n,n) + (d-3)(grad_n + 2H) J
  //   + 2 IIo^{ab} R_{cabd} n^c n^d + H Ric(n,n)
  {
    Jet S = s_functional(geo, sigma);
    double lhs = 0.5 * normal_derivative(geo, sigma, S, 3).value() +
                 (d - 3) * normal_derivative(geo, sigma, rho, 2).value();
    TensorField Gf(geo, 2, geo.curvature_order());
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) Gf.at({a, b}) = geo.einstein(a, b);
    double ndG = normal_derivative(geo, sigma, contract_nn(Gf, nup), 1).value();
    double ndJ = normal_derivative(geo, sigma, jj, 1).value();
    double rterm =
        iio_Rnn(f, [&](int c, int a, int b, int e) { return geo.riemann(c, a, b, e).value(); });
    double ricnn = contract_nn(geo.ricci_field(), f.n_up).value();
    double rhs = -ctx.intr.lap_H().value() - f.H * f.K - 2.0 * tr_iio3(f) + ndG +
                 (d - 3) * (ndJ + 2.0 * f.H * jj.value()) + 2.0 * rterm + f.H * ricnn;
    rep.add("rhonnn", vres(lhs, rhs), tol);
  }

  // Einstein: grad_n G(n,n) =
  //   -nabla-bar^a (Ric_{ab} nhat^b)^top + IIo^{ab} Ric_{ab} - (d-2) H Ric(n,n)
  {
    TensorField Gf(geo, 2, geo.curvature_order());
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) Gf.at({a, b}) = geo.einstein(a, b);
    double lhs = normal_derivative(geo, sigma, contract_nn(Gf, nup), 1).value();
    TensorField ric_n = ctx.intr.pullback_contracted_normal(geo.ricci_field());
    double div = trace(covariant_derivative(ric_n), 0, 1).c[0].value();
    double ricnn = contract_nn(geo.ricci_field(), f.n_up).value();
    double rhs = -div + iio_dot_tensor(f, geo.ricci_field()) - (d - 2) * f.H * ricnn;
    rep.add("einstein_normal_derivative", vres(lhs, rhs), tol);
  }

  return rep;
}

}  // namespace chc
