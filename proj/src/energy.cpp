#include "chc/energy.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>

#include "chc/random_instances.hpp"

#include "chc/jet_map.hpp"
#include "chc/laplacians.hpp"
#include "chc/tractor.hpp"

namespace chc {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

void axis_nodes(const QuadAxis& ax, std::vector<double>& x, std::vector<double>& w) {
  if (ax.kind == QuadAxis::Kind::TrapezoidPeriodic) {
    x.resize(ax.n);
    w.assign(ax.n, (ax.b - ax.a) / ax.n);
    for (int i = 0; i < ax.n; ++i) x[i] = ax.a + (ax.b - ax.a) * i / ax.n;
  } else {
    gauss_legendre(ax.n, x, w);
    for (int i = 0; i < ax.n; ++i) {
      w[i] *= 0.5 * (ax.b - ax.a);
      x[i] = 0.5 * (ax.a + ax.b) + 0.5 * (ax.b - ax.a) * x[i];
    }
  }
}

struct NodeList {
  std::vector<std::vector<double>> u;
  std::vector<double> w;
};

NodeList build_nodes(const ClosedSurfaceSpec& spec) {
  const int p = static_cast<int>(spec.axes.size());
  std::vector<std::vector<double>> xs(p), ws(p);
  for (int i = 0; i < p; ++i) axis_nodes(spec.axes[i], xs[i], ws[i]);
  NodeList out;
  std::vector<int> idx(p, 0);
  for (;;) {
    std::vector<double> u(p);
    double w = 1.0;
    for (int i = 0; i < p; ++i) {
      u[i] = xs[i][idx[i]];
      w *= ws[i][idx[i]];
    }
    out.u.push_back(std::move(u));
    out.w.push_back(w);
    int i = p - 1;
    while (i >= 0 && ++idx[i] == static_cast<int>(xs[i].size())) idx[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

// Levi-Civita symbol for up to 4 indices
double eps_sym(std::span<const int> id) {
  double s = 1.0;
  std::vector<int> v(id.begin(), id.end());
  for (size_t i = 0; i < v.size(); ++i)
    for (size_t j = i + 1; j < v.size(); ++j) {
      if (v[i] == v[j]) return 0.0;
      if (v[i] > v[j]) {
        std::swap(v[i], v[j]);
        s = -s;
      }
    }
  return s;
}

std::shared_ptr<const MetricGeometry> cached_flat(int d, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const MetricGeometry>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(d, order);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, MetricGeometry::euclidean(d, order)).first;
  return it->second;
}

struct LocalData {
  std::vector<double> p;                       // node point
  std::vector<double> basis;                   // columns: tangent frame, normal (d x d)
  Jet s_flat;                                  // Euclidean distance jet in rotated coords
  double dA = 0.0;                             // embedding area density (ambient metric)
  std::shared_ptr<const MetricGeometry> geo;   // local geometry in rotated coords
  std::optional<Jet> omega_local;              // conformal factor in rotated coords
};

LocalData local_data(const ClosedSurfaceSpec& spec, const AmbientSpec& ambient,
                     std::span<const double> u, int order) {
  const int d = spec.d;
  const int p = d - 1;
  LocalData out;
  std::vector<Jet> X = spec.embed(u, order);
  out.p.resize(d);
  for (int a = 0; a < d; ++a) out.p[a] = X[a].value();

  // tangent jets and the Euclidean cross-product normal
  std::vector<Jet> T(d * p);
  for (int a = 0; a < d; ++a)
    for (int i = 0; i < p; ++i) T[a * p + i] = X[a].derivative(i).extended(order);
  std::vector<Jet> nu(d, Jet(p, order));
  {
    std::vector<int> id(d);
    for (int a = 0; a < d; ++a) {
      Jet acc(p, order);
      // nu_a = eps(a, b1..bp) T^{b1}_1 ... T^{bp}_p
      std::vector<int> bs(p, 0);
      for (;;) {
        id[0] = a;
        for (int i = 0; i < p; ++i) id[1 + i] = bs[i];
        double e = eps_sym(id);
        if (e != 0.0) {
          Jet term = Jet::constant(p, order, e);
          for (int i = 0; i < p; ++i) term = term * T[bs[i] * p + i];
          acc += term;
        }
        int i = p - 1;
        while (i >= 0 && ++bs[i] == d) bs[i--] = 0;
        if (i < 0) break;
      }
      nu[a] = acc * spec.orient;
    }
    Jet n2(p, order);
    for (int a = 0; a < d; ++a) n2 += nu[a] * nu[a];
    if (n2.value() < 1e-14)
      throw std::domain_error("sample_geometry: rank-deficient Jacobian at a quadrature node");
    Jet inv = jet_reciprocal(jet_sqrt(n2));
    for (int a = 0; a < d; ++a) nu[a] = nu[a] * inv;
  }

  // orthonormal rotated frame: tangent block from QR, last column = normal
  Eigen::MatrixXd Tm(d, p);
  for (int a = 0; a < d; ++a)
    for (int i = 0; i < p; ++i) Tm(a, i) = T[a * p + i].value();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Tm);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd Bm(d, d);
  for (int i = 0; i < p; ++i) Bm.col(i) = Q.col(i);
  for (int a = 0; a < d; ++a) Bm(a, p) = nu[a].value();
  out.basis.assign(d * d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) out.basis[a * d + b] = Bm(a, b);

  // invert (du, t) -> y = Bm^T (X(u+du) + t nu(u+du) - p) for the distance jet
  std::vector<Jet> lift;
  for (int i = 0; i < p; ++i) lift.push_back(Jet::variable(d, order, i));
  Jet tvar = Jet::variable(d, order, d - 1);
  std::vector<Jet> phi(d, Jet(d, order));
  for (int k = 0; k < d; ++k) {
    Jet acc(d, order);
    for (int a = 0; a < d; ++a) {
      Jet xa = jet_substitute(X[a], lift);
      xa -= out.p[a];
      Jet na = jet_substitute(nu[a], lift);
      acc += Bm(a, k) * (xa + tvar * na);
    }
    phi[k] = acc;
  }
  std::vector<Jet> psi = jet_invert_map(phi);
  out.s_flat = psi[d - 1];

  // local ambient geometry and the embedding area density
  Eigen::MatrixXd gp = Tm.transpose() * Tm;
  if (ambient.flat()) {
    out.geo = cached_flat(d, order);
    out.dA = std::sqrt(gp.determinant());
  } else {
    Jet om = ambient.omega->evaluate(out.p, order);
    if (om.value() <= 0.0)
      throw std::domain_error("sample_geometry: conformal factor is not positive at a node");
    std::vector<double> bm_rowmajor(d * d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) bm_rowmajor[a * d + b] = Bm(a, b);
    out.omega_local = jet_linear_change(om, bm_rowmajor, d, order);
    out.geo = MetricGeometry::conformally_flat(*out.omega_local);
    out.dA = std::pow(om.value(), p) * std::sqrt(gp.determinant());
  }
  return out;
}

DefiningFunction local_unit(const LocalData& ld, int target) {
  if (ld.geo->flat()) return {ld.s_flat, target};
  return unit_improve(ld.s_flat, *ld.geo, target);
}

double tr_iio3_frame(const HypersurfaceFrame& f) {
  const int d = f.dim();
  double r = 0.0;
  std::vector<double> up(d * d, 0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          up[a * d + b] += f.geo->ginv(a, c).value() * f.geo->ginv(b, e).value() *
                           f.IIo[c * d + e];
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          r += up[a * d + b] * f.IIo[b * d + c] * f.geo->ginv(c, e).value() * f.IIo[e * d + a];
  return r;
}

double obstruction_d3(const HypersurfaceFrame& frame, const IntrinsicGeometry& intr) {
  // B = -(1/3)(divdiv IIo + H K + P^top . IIo); valid in any scale
  const int d = 3;
  double pdot = 0.0;
  std::vector<double> up(d * d, 0.0);
  const auto& geo = *frame.geo;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          up[a * d + b] += geo.ginv(a, c).value() * geo.ginv(b, e).value() *
                           frame.IIo[c * d + e];
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) pdot += up[a * d + b] * geo.schouten(a, b).value();
  return -(intr.div_div_IIo().value() + frame.H * frame.K + pdot) / 3.0;
}

EnergyReport integrate(const ClosedSurfaceSpec& spec,
                       const std::function<double(std::span<const double>)>& node_value,
                       const std::string& name, bool keep_nodes) {
  auto run = [&](const ClosedSurfaceSpec& s) {
    NodeList nodes = build_nodes(s);
    std::vector<double> vals(nodes.u.size());
    for (size_t i = 0; i < nodes.u.size(); ++i) vals[i] = nodes.w[i] * node_value(nodes.u[i]);
    return std::make_pair(pairwise_sum(vals), vals);
  };
  EnergyReport rep;
  rep.name = name;
  auto [value, vals] = run(spec);
  rep.value = value;
  ClosedSurfaceSpec coarse = spec;
  for (QuadAxis& ax : coarse.axes) ax.n = std::max(4, ax.n / 2);
  rep.coarse_value = run(coarse).first;
  rep.error_estimate = std::max(std::abs(rep.value - rep.coarse_value), 1e-12);
  if (keep_nodes) rep.node_integrands = std::move(vals);
  return rep;
}

}  // namespace

double pairwise_sum(std::span<const double> v) {
  if (v.size() == 0) return 0.0;
  if (v.size() == 1) return v[0];
  size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

ClosedSurfaceSpec ClosedSurfaceSpec::with_nodes(int n) const {
  ClosedSurfaceSpec out = *this;
  for (QuadAxis& ax : out.axes) ax.n = n;
  return out;
}

ClosedSurfaceSpec sphere_spec(int d, double radius, int n) {
  ClosedSurfaceSpec spec;
  spec.name = "sphere";
  spec.d = d;
  if (d == 3) {
    spec.orient = -1.0;  // outward normal
    spec.axes = {{QuadAxis::Kind::GaussLegendre, n, -1.0, 1.0},
                 {QuadAxis::Kind::TrapezoidPeriodic, n, 0.0, 2.0 * M_PI}};
    spec.embed = [radius](std::span<const double> u, int order) {
      Jet t = Jet::variable(2, order, 0, u[0]);
      Jet phi = Jet::variable(2, order, 1, u[1]);
      Jet sin_theta = jet_sqrt(1.0 - t * t + 1e-300);
      std::vector<Jet> X(3);
      X[0] = radius * sin_theta * jet_cos(phi);
      X[1] = radius * sin_theta * jet_sin(phi);
      X[2] = radius * t;
      return X;
    };
  } else if (d == 4) {
    spec.axes = {{QuadAxis::Kind::GaussLegendre, n, 0.0, M_PI},
                 {QuadAxis::Kind::GaussLegendre, n, -1.0, 1.0},
                 {QuadAxis::Kind::TrapezoidPeriodic, n, 0.0, 2.0 * M_PI}};
    spec.embed = [radius](std::span<const double> u, int order) {
      Jet psi = Jet::variable(3, order, 0, u[0]);
      Jet t = Jet::variable(3, order, 1, u[1]);
      Jet phi = Jet::variable(3, order, 2, u[2]);
      Jet sp = jet_sin(psi);
      Jet st = jet_sqrt(1.0 - t * t + 1e-300);
      std::vector<Jet> X(4);
      X[0] = radius * sp * st * jet_cos(phi);
      X[1] = radius * sp * st * jet_sin(phi);
      X[2] = radius * sp * t;
      X[3] = radius * jet_cos(psi);
      return X;
    };
  } else {
    throw std::invalid_argument("sphere_spec: d must be 3 or 4");
  }
  return spec;
}

ClosedSurfaceSpec torus_spec(double R, double r, int n) {
  ClosedSurfaceSpec spec;
  spec.name = "torus";
  spec.d = 3;
  spec.axes = {{QuadAxis::Kind::TrapezoidPeriodic, n, 0.0, 2.0 * M_PI},
               {QuadAxis::Kind::TrapezoidPeriodic, n, 0.0, 2.0 * M_PI}};
  spec.embed = [R, r](std::span<const double> u, int order) {
    Jet uu = Jet::variable(2, order, 0, u[0]);
    Jet vv = Jet::variable(2, order, 1, u[1]);
    Jet ring = R + r * jet_cos(vv);
    std::vector<Jet> X(3);
    X[0] = ring * jet_cos(uu);
    X[1] = ring * jet_sin(uu);
    X[2] = r * jet_sin(vv);
    return X;
  };
  return spec;
}

ClosedSurfaceSpec s1xs2_spec(double R, double r, int n) {
  ClosedSurfaceSpec spec;
  spec.name = "s1xs2";
  spec.d = 4;
  spec.orient = -1.0;  // normal pointing away from the core circle
  spec.axes = {{QuadAxis::Kind::TrapezoidPeriodic, n, 0.0, 2.0 * M_PI},
               {QuadAxis::Kind::GaussLegendre, n, -1.0, 1.0},
               {QuadAxis::Kind::TrapezoidPeriodic, n, 0.0, 2.0 * M_PI}};
  spec.embed = [R, r](std::span<const double> u, int order) {
    Jet uu = Jet::variable(3, order, 0, u[0]);
    Jet t = Jet::variable(3, order, 1, u[1]);
    Jet phi = Jet::variable(3, order, 2, u[2]);
    Jet st = jet_sqrt(1.0 - t * t + 1e-300);
    Jet ring = R + r * t;
    std::vector<Jet> X(4);
    X[0] = ring * jet_cos(uu);
    X[1] = ring * jet_sin(uu);
    X[2] = r * st * jet_cos(phi);
    X[3] = r * st * jet_sin(phi);
    return X;
  };
  return spec;
}

ClosedSurfaceSpec perturbed_sphere_spec(int d, double r0, std::vector<double> coeffs, double amp,
                                        int n) {
  ClosedSurfaceSpec base = sphere_spec(d, 1.0, n);
  ClosedSurfaceSpec spec = base;
  spec.name = "perturbed-sphere";
  spec.embed = [base, r0, coeffs, amp, d](std::span<const double> u, int order) {
    std::vector<Jet> nu = base.embed(u, order);  // unit-vector components
    // polynomial perturbation in the components, degree <= 2
    Jet pert(d - 1, order);
    size_t k = 0;
    for (int a = 0; a < d && k < coeffs.size(); ++a) pert += coeffs[k++] * nu[a];
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d && k < coeffs.size(); ++b) pert += coeffs[k++] * nu[a] * nu[b];
    Jet radial = r0 * (1.0 + amp * pert);
    std::vector<Jet> X(d);
    for (int a = 0; a < d; ++a) X[a] = radial * nu[a];
    return X;
  };
  return spec;
}

ClosedSurfaceSpec parametrized_spec(int d, std::vector<Expression> components,
                                    std::vector<QuadAxis> axes, const std::string& name) {
  if (static_cast<int>(components.size()) != d)
    throw std::invalid_argument("parametrized_spec: needs d component expressions");
  ClosedSurfaceSpec spec;
  spec.name = name;
  spec.d = d;
  spec.axes = std::move(axes);
  spec.embed = [components](std::span<const double> u, int order) {
    std::vector<Jet> X;
    X.reserve(components.size());
    for (const Expression& e : components) X.push_back(e.evaluate(u, order));
    return X;
  };
  return spec;
}

SurfaceSample sample_geometry(const ClosedSurfaceSpec& spec, const AmbientSpec& ambient,
                              std::span<const double> u, int order, bool want_B, bool want_L) {
  const int d = spec.d;
  LocalData ld = local_data(spec, ambient, u, order);
  DefiningFunction s = local_unit(ld, want_B ? 2 : 1);
  HypersurfaceFrame frame = second_fundamental_form(s, ld.geo);

  SurfaceSample out;
  out.point = ld.p;
  out.dA = ld.dA;
  out.H = frame.H;
  out.K = frame.K;
  out.trIIo3 = tr_iio3_frame(frame);
  if (want_B || want_L) {
    IntrinsicGeometry intr = intrinsic_geometry(frame);
    if (want_L && d >= 4) out.L = intr.rigidity_L().value();
    if (want_B) {
      if (d == 3) {
        out.B = obstruction_d3(frame, intr);
      } else {
        DefiningDensity dd = conformal_unit_improve(ld.s_flat, *ld.geo, d);
        out.B = dd.B_base;
      }
    }
  }
  return out;
}

SurfaceSample sample_from_levelset(const Expression& levelset, const AmbientSpec& ambient,
                                   std::span<const double> point, int order) {
  const int d = ambient.d;
  Jet s0 = levelset.evaluate(point, order);
  std::shared_ptr<const MetricGeometry> geo;
  if (ambient.flat()) {
    geo = cached_flat(d, order);
  } else {
    geo = MetricGeometry::conformally_flat(ambient.omega->evaluate(point, order));
  }
  DefiningFunction s = unit_improve(s0, *geo, 2);
  HypersurfaceFrame frame = second_fundamental_form(s, geo);
  SurfaceSample out;
  out.point.assign(point.begin(), point.end());
  out.H = frame.H;
  out.K = frame.K;
  out.trIIo3 = tr_iio3_frame(frame);
  return out;
}

EnergyReport willmore_energy_2d(const ClosedSurfaceSpec& spec, const AmbientSpec& ambient,
                                int order, bool keep_nodes) {
  if (spec.d != 3) throw std::invalid_argument("willmore_energy_2d: needs d = 3");
  auto node = [&](std::span<const double> u) {
    SurfaceSample s = sample_geometry(spec, ambient, u, order);
    return s.K * s.dA;
  };
  return integrate(spec, node, "willmore-2d", keep_nodes);
}

EnergyReport rigidity_energy_3d(const ClosedSurfaceSpec& spec, const AmbientSpec& ambient,
                                int order, bool keep_nodes) {
  if (spec.d != 4) throw std::invalid_argument("rigidity_energy_3d: needs d = 4");
  auto node = [&](std::span<const double> u) {
    SurfaceSample s = sample_geometry(spec, ambient, u, order);
    return 8.0 * s.trIIo3 * s.dA;
  };
  return integrate(spec, node, "rigidity-3d", keep_nodes);
}

EnergyReport energy_general(const ClosedSurfaceSpec& spec, const AmbientSpec& ambient, int order,
                            bool keep_nodes) {
  const int d = spec.d;
  if (d != 3 && d != 4)
    throw std::invalid_argument("energy_general: supported for d = 3, 4 only");
  if (order < 0) order = d == 3 ? 5 : 6;

  auto node = [&](std::span<const double> u) {
    LocalData ld = local_data(spec, ambient, u, order);
    // conformal-unit density: Euclidean closed form from the distance jet,
    // moved to the curved scale by covariance when needed
    auto flat_geo = cached_flat(d, order);
    Jet sigma = euclidean_sigma_of_unit({ld.s_flat, order - 2}, *flat_geo);
    std::shared_ptr<const MetricGeometry> geo = ld.geo;
    if (!ambient.flat()) sigma = (*ld.omega_local) * sigma;

    ScaleData sd = ScaleData::make(geo, sigma);
    YamabeContext dummy;  // build_Pk needs only the scale data and order bookkeeping
    dummy.geo = geo;
    dummy.dd.sigma = sigma;
    dummy.dd.rho = sd.rho;
    dummy.dd.improvement_order = d;
    ExtrinsicLaplacian P{d - 1, sd, false};
    TractorField I = scale_tractor(sd);
    TractorField PI = P.apply(I);
    double val = I.c[0].value() * PI.c[d + 1].value() + I.c[d + 1].value() * PI.c[0].value();
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        val += geo->ginv(a, b).value() * I.c[1 + a].value() * PI.c[1 + b].value();
    return val * ld.dA;
  };
  return integrate(spec, node, "energy-general", keep_nodes);
}

double obstruction_integral(const ClosedSurfaceSpec& spec, const AmbientSpec& ambient,
                            const std::function<double(std::span<const double>)>& phi,
                            int order) {
  NodeList nodes = build_nodes(spec);
  std::vector<double> vals(nodes.u.size());
  for (size_t i = 0; i < nodes.u.size(); ++i) {
    SurfaceSample s = sample_geometry(spec, ambient, nodes.u[i], order, /*want_B=*/true);
    vals[i] = nodes.w[i] * s.B * phi(nodes.u[i]) * s.dA;
  }
  return pairwise_sum(vals);
}

GradientCheckResult gradient_check(const ClosedSurfaceSpec& spec, const AmbientSpec& ambient,
                                   int variations, unsigned seed, double eps, int order) {
  if (spec.d != 3)
    throw std::invalid_argument("gradient_check: implemented for d = 3 (E = int K)");
  Rng rng(seed);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);

  GradientCheckResult out;
  for (int m = 0; m < variations; ++m) {
    // random bump: polynomial in the unit-sphere direction components
    std::vector<double> cs(9);
    for (double& c : cs) c = coeff(rng);
    ClosedSurfaceSpec base = spec;
    auto phi_of = [cs, base](std::span<const double> u) {
      std::vector<Jet> X = base.embed(u, 1);
      double nrm = 0.0;
      for (const Jet& x : X) nrm += x.value() * x.value();
      nrm = std::sqrt(nrm);
      double v[3] = {X[0].value() / nrm, X[1].value() / nrm, X[2].value() / nrm};
      double p = cs[0] * v[0] + cs[1] * v[1] + cs[2] * v[2] + cs[3] * v[0] * v[1] +
                 cs[4] * v[0] * v[2] + cs[5] * v[1] * v[2] + cs[6] * v[0] * v[0] +
                 cs[7] * v[1] * v[1] + cs[8] * v[2] * v[2];
      return p;
    };

    auto perturbed = [&](double t) {
      ClosedSurfaceSpec pspec = spec;
      ClosedSurfaceSpec inner = spec;
      pspec.embed = [inner, cs, t](std::span<const double> u, int order2) {
        std::vector<Jet> X = inner.embed(u, order2);
        const int d = 3, p = 2;
        // cross-product unit normal of the unperturbed surface
        std::vector<Jet> T(d * p);
        for (int a = 0; a < d; ++a)
          for (int i = 0; i < p; ++i) T[a * p + i] = X[a].derivative(i).extended(order2);
        std::vector<Jet> nu(d, Jet(p, order2));
        nu[0] = T[1 * p + 0] * T[2 * p + 1] - T[2 * p + 0] * T[1 * p + 1];
        nu[1] = T[2 * p + 0] * T[0 * p + 1] - T[0 * p + 0] * T[2 * p + 1];
        nu[2] = T[0 * p + 0] * T[1 * p + 1] - T[1 * p + 0] * T[0 * p + 1];
        Jet n2 = nu[0] * nu[0] + nu[1] * nu[1] + nu[2] * nu[2];
        Jet inv = jet_reciprocal(jet_sqrt(n2));
        Jet r2(p, order2);
        for (int a = 0; a < d; ++a) r2 += X[a] * X[a];
        Jet rad = jet_sqrt(r2);
        Jet rinv = jet_reciprocal(rad);
        Jet phi(p, order2);
        {
          Jet v0 = X[0] * rinv, v1 = X[1] * rinv, v2 = X[2] * rinv;
          phi = cs[0] * v0 + cs[1] * v1 + cs[2] * v2 + cs[3] * v0 * v1 + cs[4] * v0 * v2 +
                cs[5] * v1 * v2 + cs[6] * v0 * v0 + cs[7] * v1 * v1 + cs[8] * v2 * v2;
        }
        for (int a = 0; a < d; ++a) X[a] += t * phi * (nu[a] * inv);
        return X;
      };
      return pspec;
    };

    double h = eps;
    double e1 = 0, e2 = 0, e3 = 0, e4 = 0;
    for (int attempt = 0;; ++attempt) {
      try {
        e1 = willmore_energy_2d(perturbed(h), ambient, order).value;
        e2 = willmore_energy_2d(perturbed(-h), ambient, order).value;
        e3 = willmore_energy_2d(perturbed(2 * h), ambient, order).value;
        e4 = willmore_energy_2d(perturbed(-2 * h), ambient, order).value;
        break;
      } catch (const std::domain_error&) {
        h *= 0.5;  // immersion breakdown under the perturbation
        if (attempt > 8)
          throw std::domain_error("gradient_check: degenerate variation (eps underflow)");
      }
    }
    double dE = (8.0 * (e1 - e2) - (e3 - e4)) / (12.0 * h);
    double IB = obstruction_integral(spec, ambient, phi_of, order);
    out.fitted_constants.push_back(dE / IB);
  }

  double mean = 0.0;
  for (double c : out.fitted_constants) mean += c;
  mean /= out.fitted_constants.size();
  out.mean_constant = mean;
  for (double c : out.fitted_constants)
    out.spread = std::max(out.spread, std::abs(c - mean) / std::abs(mean));
  return out;
}

}  // namespace chc
