#include <cmath>
#include <random>

#include "chc/jet.hpp"
#include "chc/jet_map.hpp"
#include "chc/multi_index.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace chc;
using testutil::jet_residual;
using testutil::random_jet;

namespace {

// Independent convolution oracle: expands both operands over raw exponent
// tuples and multiplies term by term.
Jet naive_product(const Jet& a, const Jet& b) {
  Jet out(a.dim(), a.order());
  const auto& tab = a.table();
  for (int p = 0; p < a.size(); ++p) {
    if (a[p] == 0.0) continue;
    for (int q = 0; q < b.size(); ++q) {
      if (b[q] == 0.0) continue;
      if (tab.degree(p) + tab.degree(q) > a.order()) continue;
      Exponents e{};
      for (int i = 0; i < a.dim(); ++i)
        e[i] = static_cast<std::uint8_t>(tab.exponents(p)[i] + tab.exponents(q)[i]);
      out[tab.position(e)] += a[p] * b[q];
    }
  }
  return out;
}

}  // namespace

TEST_CASE("graded-lex ordering is total and degree-major") {
  const auto& tab = IndexTable::get(3, 4);
  CHECK(tab.size() == 35);
  for (int p = 1; p < tab.size(); ++p) CHECK(tab.degree(p) >= tab.degree(p - 1));
  // prefix property: the order-2 table is a prefix of the order-4 one
  const auto& low = IndexTable::get(3, 2);
  for (int p = 0; p < low.size(); ++p) CHECK(low.exponents(p) == tab.exponents(p));
}

TEST_CASE("jet multiplication: (1+x)(1-x) = 1-x^2") {
  Jet one_plus = Jet::constant(2, 2, 1.0) + Jet::variable(2, 2, 0);
  Jet one_minus = Jet::constant(2, 2, 1.0) - Jet::variable(2, 2, 0);
  Jet prod = jet_multiply(one_plus, one_minus);
  Jet want = Jet::constant(2, 2, 1.0);
  want.set_coeff({2, 0, 0, 0, 0}, -1.0);
  CHECK(jet_residual(prod, want) == 0.0);
}

TEST_CASE("jet multiplication identity and contract checks") {
  std::mt19937_64 rng(7);
  Jet a = random_jet(rng, 3, 4, 1.0, 0.7);
  Jet one = Jet::constant(3, 4, 1.0);
  CHECK(jet_residual(jet_multiply(a, one), a) == 0.0);
  CHECK_THROWS_AS(jet_multiply(a, Jet::constant(2, 4, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(jet_multiply(a, Jet::constant(3, 3, 1.0)), std::invalid_argument);
}

TEST_CASE("random degree-3 jets in 3 vars match the naive convolution oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Jet a = random_jet(rng, 3, 3, 1.0, 0.3);
    Jet b = random_jet(rng, 3, 3, 1.0, -1.2);
    CHECK(jet_residual(jet_multiply(a, b), naive_product(a, b)) < 1e-15);
  }
}

TEST_CASE("jet ring laws on random order-6 jets in up to 5 variables") {
  std::mt19937_64 rng(13);
  for (int dim = 2; dim <= 5; ++dim) {
    Jet a = random_jet(rng, dim, 6, 1.0, 0.4);
    Jet b = random_jet(rng, dim, 6, 1.0, -0.8);
    Jet c = random_jet(rng, dim, 6, 1.0, 1.5);
    CHECK(jet_residual(a * b, b * a) < 1e-14);
    CHECK(jet_residual((a * b) * c, a * (b * c)) < 1e-14);
    CHECK(jet_residual(a * (b + c), a * b + a * c) < 1e-14);
  }
}

TEST_CASE("partial derivatives commute coefficient-exactly") {
  std::mt19937_64 rng(17);
  Jet a = random_jet(rng, 4, 6, 1.0, 0.9);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Jet ij = a.derivative(i).derivative(j);
      Jet ji = a.derivative(j).derivative(i);
      for (int p = 0; p < ij.size(); ++p) CHECK(ij[p] == ji[p]);
    }
}

TEST_CASE("exp(x+y) to order 2") {
  Jet g = Jet::variable(2, 2, 0) + Jet::variable(2, 2, 1);
  Jet e = jet_exp(g);
  CHECK(e.coeff({0, 0, 0, 0, 0}) == doctest::Approx(1.0));
  CHECK(e.coeff({1, 0, 0, 0, 0}) == doctest::Approx(1.0));
  CHECK(e.coeff({0, 1, 0, 0, 0}) == doctest::Approx(1.0));
  CHECK(e.coeff({2, 0, 0, 0, 0}) == doctest::Approx(0.5));
  CHECK(e.coeff({1, 1, 0, 0, 0}) == doctest::Approx(1.0));
  CHECK(e.coeff({0, 2, 0, 0, 0}) == doctest::Approx(0.5));
}

TEST_CASE("sqrt(1+x) binomial series to order 2") {
  Jet g = Jet::constant(1, 2, 1.0) + Jet::variable(1, 2, 0);
  Jet s = jet_sqrt(g);
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(0.5));
  CHECK(s[2] == doctest::Approx(-0.125));
}

TEST_CASE("log(exp(x)) = x") {
  Jet x = Jet::variable(1, 6, 0, 0.3);
  Jet roundtrip = jet_log(jet_exp(x));
  CHECK(jet_residual(roundtrip, x) < 1e-15);
}

TEST_CASE("reciprocal: geometric series and multiply-back") {
  Jet g = Jet::constant(1, 3, 1.0) - Jet::variable(1, 3, 0);
  Jet r = jet_reciprocal(g);
  for (int k = 0; k <= 3; ++k) CHECK(r[k] == doctest::Approx(1.0));

  CHECK(jet_residual(jet_reciprocal(Jet::constant(2, 4, 1.0)), Jet::constant(2, 4, 1.0)) == 0.0);

  std::mt19937_64 rng(23);
  for (int dim = 2; dim <= 4; ++dim) {
    Jet a = random_jet(rng, dim, 6, 1.0, 2.0);
    Jet back = jet_multiply(jet_reciprocal(a), a);
    CHECK(jet_residual(back, Jet::constant(dim, 6, 1.0)) < 1e-13);
  }

  CHECK_THROWS_AS(jet_reciprocal(Jet::variable(2, 3, 0)), std::domain_error);
}

TEST_CASE("substitute composes multivariate jets exactly") {
  std::mt19937_64 rng(29);
  // f(u,v) = u*v + u^2 composed with u = x+y^2, v = 2y at the coefficient level
  Jet f(2, 4);
  f.set_coeff({1, 1, 0, 0, 0}, 1.0);
  f.set_coeff({2, 0, 0, 0, 0}, 1.0);
  Jet u = Jet::variable(2, 4, 0);
  u.set_coeff({0, 2, 0, 0, 0}, 1.0);
  Jet v = 2.0 * Jet::variable(2, 4, 1);
  std::vector<Jet> args = {u, v};
  Jet got = jet_substitute(f, args);
  // expand by hand: (x+y^2)(2y) + (x+y^2)^2 = 2xy + 2y^3 + x^2 + 2xy^2 + y^4
  Jet want(2, 4);
  want.set_coeff({1, 1, 0, 0, 0}, 2.0);
  want.set_coeff({0, 3, 0, 0, 0}, 2.0);
  want.set_coeff({2, 0, 0, 0, 0}, 1.0);
  want.set_coeff({1, 2, 0, 0, 0}, 2.0);
  want.set_coeff({0, 4, 0, 0, 0}, 1.0);
  CHECK(jet_residual(got, want) < 1e-15);
}

TEST_CASE("map inversion round-trips") {
  std::mt19937_64 rng(31);
  for (int dim = 2; dim <= 4; ++dim) {
    std::vector<Jet> F;
    for (int i = 0; i < dim; ++i) {
      Jet f = random_jet(rng, dim, 6, 0.4, 0.0);
      f[1 + i] += 1.0;  // keep the Jacobian near identity
      F.push_back(f);
    }
    auto G = jet_invert_map(F);
    for (int i = 0; i < dim; ++i) {
      Jet comp = jet_substitute(F[i], G);
      Jet want = Jet::variable(dim, 6, i);
      CHECK(jet_residual(comp, want) < 1e-12);
    }
  }
}

TEST_CASE("adapted coordinates: vanishing order and division") {
  std::mt19937_64 rng(37);
  Jet sigma = Jet::variable(3, 6, 2);  // z
  sigma += 0.3 * Jet::variable(3, 6, 0) * Jet::variable(3, 6, 1);
  AdaptedCoords ad(sigma);

  Jet f = sigma * sigma * random_jet(rng, 3, 6, 1.0, 2.0);
  CHECK(ad.vanishing_order(f, 1e-12) == 2);

  Jet q = ad.divide(f, 2);
  Jet back = q * sigma.truncated(q.order()) * sigma.truncated(q.order());
  CHECK(jet_residual(back, f.truncated(back.order())) < 1e-12);

  CHECK_THROWS_AS(ad.divide(sigma, 2), std::domain_error);
}

TEST_CASE("jet_powi handles zero constant terms") {
  Jet x = Jet::variable(2, 5, 0);
  Jet x3 = jet_powi(x, 3);
  Jet want(2, 5);
  want.set_coeff({3, 0, 0, 0, 0}, 1.0);
  CHECK(jet_residual(x3, want) == 0.0);
}
