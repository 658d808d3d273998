#include <cmath>

#include "chc/expression.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace chc;
using testutil::jet_residual;

namespace {
Expression parse_ambient(const std::string& text, int dim) {
  auto names = Expression::ambient_names(dim);
  return Expression::parse(text, names);
}
}  // namespace

TEST_CASE("x^2+y^2 about (1,0): shifted binomial re-expansion") {
  Expression e = parse_ambient("x^2 + y^2", 2);
  double base[] = {1.0, 0.0};
  Jet j = e.evaluate(base, 2);
  CHECK(j.coeff({0, 0, 0, 0, 0}) == doctest::Approx(1.0));
  CHECK(j.coeff({1, 0, 0, 0, 0}) == doctest::Approx(2.0));
  CHECK(j.coeff({2, 0, 0, 0, 0}) == doctest::Approx(1.0));
  CHECK(j.coeff({0, 2, 0, 0, 0}) == doctest::Approx(1.0));
  CHECK(j.coeff({0, 1, 0, 0, 0}) == doctest::Approx(0.0));
}

TEST_CASE("radial function about the north pole") {
  Expression e = parse_ambient("sqrt(x^2 + y^2 + z^2)", 3);
  double base[] = {0.0, 0.0, 1.0};
  Jet j = e.evaluate(base, 1);
  CHECK(j.value() == doctest::Approx(1.0));
  CHECK(j.coeff({0, 0, 1, 0, 0}) == doctest::Approx(1.0));
  CHECK(j.coeff({1, 0, 0, 0, 0}) == doctest::Approx(0.0));
  CHECK(j.coeff({0, 1, 0, 0, 0}) == doctest::Approx(0.0));
}

TEST_CASE("exp(x*y) matches a central-difference oracle") {
  Expression e = parse_ambient("exp(x*y)", 2);
  double base[] = {0.0, 0.0};
  Jet j = e.evaluate(base, 4);
  // d^4/(dx^2 dy^2) exp(xy) at 0 via 5-point central differences per axis
  auto f = [](double x, double y) { return std::exp(x * y); };
  const double h = 1e-2;
  double acc = 0.0;
  const double wx[5] = {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12};
  for (int i = -2; i <= 2; ++i)
    for (int k = -2; k <= 2; ++k) acc += wx[i + 2] * wx[k + 2] * f(i * h, k * h);
  acc /= h * h * h * h;
  double jet_val = j.coeff({2, 2, 0, 0, 0}) * 4.0;  // coefficient -> derivative: *2!*2!
  CHECK(std::abs(jet_val - acc) < 1e-7);
  CHECK(j.coeff({1, 1, 0, 0, 0}) == doctest::Approx(1.0));
}

TEST_CASE("polynomial re-expansion at any base point (shift-and-expand oracle)") {
  Expression e = parse_ambient("2*x^3 - x*y + 0.5*y^2", 2);
  double base[] = {0.7, -1.3};
  Jet j = e.evaluate(base, 3);
  // oracle: expand (x0+s)^a (y0+t)^b by binomials
  auto binom = [](int n, int k) {
    double r = 1;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
  };
  Jet want(2, 3);
  auto add_term = [&](double coef, int a, int b) {
    for (int i = 0; i <= a; ++i)
      for (int k = 0; k <= b; ++k) {
        Exponents ex{};
        ex[0] = static_cast<std::uint8_t>(i);
        ex[1] = static_cast<std::uint8_t>(k);
        if (i + k > 3) continue;
        want.set_coeff(ex, want.coeff(ex) + coef * binom(a, i) * binom(b, k) *
                               std::pow(base[0], a - i) * std::pow(base[1], b - k));
      }
  };
  add_term(2.0, 3, 0);
  add_term(-1.0, 1, 1);
  add_term(0.5, 0, 2);
  CHECK(jet_residual(j, want) < 1e-14);
}

TEST_CASE("parse errors carry a column and bad domains throw") {
  auto names = Expression::ambient_names(2);
  CHECK_THROWS_WITH_AS(Expression::parse("x + ", names), doctest::Contains("column"),
                       std::invalid_argument);
  CHECK_THROWS_AS(Expression::parse("x + q", names), std::invalid_argument);
  Expression bad = Expression::parse("log(x)", names);
  double base[] = {-1.0, 0.0};
  CHECK_THROWS_WITH_AS(bad.evaluate(base, 2), doctest::Contains("log"), std::domain_error);
}

TEST_CASE("powers: integer vs general") {
  auto names = Expression::ambient_names(1);
  Expression cube = Expression::parse("x^3", names);
  double zero[] = {0.0};
  Jet j = cube.evaluate(zero, 4);
  CHECK(j.coeff({3, 0, 0, 0, 0}) == doctest::Approx(1.0));
  Expression frac = Expression::parse("x^1.5", names);
  double pos[] = {4.0};
  CHECK(frac.evaluate_value(pos) == doctest::Approx(8.0));
  Expression rhs = Expression::parse("x^x", names);
  double two[] = {2.0};
  CHECK(rhs.evaluate_value(two) == doctest::Approx(4.0));
}
