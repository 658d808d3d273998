#include "chc/random_instances.hpp"

#include "chc/jet_map.hpp"

#include <cmath>

namespace chc {

Jet random_polynomial(Rng& rng, int dim, int order, double amp, double decay, bool zero_constant,
                      bool zero_linear) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Jet j(dim, order);
  const auto& tab = j.table();
  for (int p = 0; p < j.size(); ++p) {
    int deg = tab.degree(p);
    j[p] = u(rng) * amp * std::pow(decay, std::max(0, deg - 1));
  }
  if (zero_constant) j[0] = 0.0;
  if (zero_linear)
    for (int i = 0; i < dim; ++i) j[1 + i] = 0.0;
  return j;
}

std::shared_ptr<const MetricGeometry> random_metric(Rng& rng, int dim, int order, double amp) {
  std::vector<Jet> g(dim * dim, Jet(dim, order));
  for (int a = 0; a < dim; ++a) {
    for (int b = a; b < dim; ++b) {
      Jet p = random_polynomial(rng, dim, order, amp, 0.4, true, false);
      if (a == b) p += 1.0;
      g[a * dim + b] = p;
      g[b * dim + a] = p;
    }
  }
  return MetricGeometry::make(std::move(g));
}

Jet random_conformal_factor(Rng& rng, int dim, int order, double amp) {
  return jet_exp(random_polynomial(rng, dim, order, amp, 0.4, true, false));
}

std::shared_ptr<const MetricGeometry> random_conformally_flat(Rng& rng, int dim, int order,
                                                              double amp) {
  return MetricGeometry::conformally_flat(random_conformal_factor(rng, dim, order, amp));
}

Jet random_graph_defining_function(Rng& rng, int dim, int order, double amp, double tilt) {
  Jet f = random_polynomial(rng, dim - 1, order, amp, 0.4, true, true);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  // lift f into ambient variables, then s = x_d - f(x_1..x_{d-1})
  std::vector<Jet> args;
  for (int i = 0; i < dim - 1; ++i) args.push_back(Jet::variable(dim, order, i));
  Jet s = Jet::variable(dim, order, dim - 1) - jet_substitute(f, args);
  for (int i = 0; i < dim - 1; ++i) s[1 + i] += tilt * u(rng);
  return s;
}

Jet random_scaled_defining_function(Rng& rng, int dim, int order, double amp) {
  Jet s = random_graph_defining_function(rng, dim, order, amp);
  return s * random_conformal_factor(rng, dim, order, 0.4);
}

}  // namespace chc
