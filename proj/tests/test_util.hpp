#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "chc/jet.hpp"

namespace chc::testutil {

/// Relative residual when the reference magnitude exceeds 1, absolute
/// otherwise (tolerance convention from docs/conventions.md).
inline double residual(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

inline double jet_residual(const Jet& a, const Jet& b) {
  Jet d = a - b;
  double scale = std::max({1.0, a.max_abs(), b.max_abs()});
  return d.max_abs() / scale;
}

/// Random jet with degree-damped coefficients; constant term adjustable.
inline Jet random_jet(std::mt19937_64& rng, int dim, int order, double amp = 1.0,
                      double constant = 0.0, double decay = 0.5) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Jet j(dim, order);
  const auto& tab = j.table();
  double scale = amp;
  for (int p = 1; p < j.size(); ++p) j[p] = u(rng) * scale * std::pow(decay, tab.degree(p) - 1);
  j[0] = constant;
  return j;
}

}  // namespace chc::testutil
