#include "finsler/expression.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

using namespace finsler;

TEST_CASE("parses and evaluates arithmetic with precedence") {
  auto e = Expression::parse("1 + 2*x1^2 - y2/4", 2);
  Vec x = (Vec(2) << 3.0, 0.0).finished();
  Vec y = (Vec(2) << 0.0, 8.0).finished();
  CHECK(e.eval_d(x, y) == doctest::Approx(1 + 2 * 9 - 2));
  CHECK(e.depends_on_y());
}

TEST_CASE("functions, pi, unary minus, right-associative power") {
  auto e = Expression::parse("sin(pi/2) + cos(0) - -1 + 2^3^1", 2);
  Vec x = Vec::Zero(2), y = Vec::Zero(2);
  CHECK(e.eval_d(x, y) == doctest::Approx(1 + 1 + 1 + 8));

  auto f = Expression::parse("-x1^2", 2);
  x[0] = 3.0;
  CHECK(f.eval_d(x, y) == doctest::Approx(-9.0));

  auto g = Expression::parse("sqrt(y1^2 + y2^2)", 2);
  y << 3.0, 4.0;
  CHECK(g.eval_d(x, y) == doctest::Approx(5.0));
}

TEST_CASE("evaluates through jets with exact derivatives") {
  auto e = Expression::parse("sin(x1)*y2 + exp(x2)*sqrt(1 + y1^2)", 2);
  auto L = jet_layout({{2, 1}, {2, 1}});
  const Vec x0 = (Vec(2) << 0.3, -0.8).finished();
  const Vec y0 = (Vec(2) << 0.9, 1.4).finished();
  VecX<JetD> x(2), y(2);
  for (int i = 0; i < 2; ++i) {
    x[i] = JetD::variable(L, i, x0[i]);
    y[i] = JetD::variable(L, 2 + i, y0[i]);
  }
  const JetD f = e(x, y);

  auto fd = [&](int var) {
    return testing::fd_partial(
        [&](const Vec& v) { return e.eval_d(v.head(2), v.tail(2)); },
        (Vec(4) << x0, y0).finished(), var);
  };
  for (int v = 0; v < 4; ++v)
    CHECK(std::abs(f.partial(v) - fd(v)) < 1e-6);
}

TEST_CASE("fractional powers go through the series path") {
  auto e = Expression::parse("(y1^4 + y2^4)^0.25", 2);
  Vec x = Vec::Zero(2);
  Vec y = (Vec(2) << 1.0, 1.0).finished();
  CHECK(e.eval_d(x, y) == doctest::Approx(std::pow(2.0, 0.25)));
}

TEST_CASE("rejects malformed or out-of-range input") {
  CHECK_THROWS_AS(Expression::parse("x3", 2), ConfigError);
  CHECK_THROWS_AS(Expression::parse("sin x1", 2), ConfigError);
  CHECK_THROWS_AS(Expression::parse("1 +", 2), ConfigError);
  CHECK_THROWS_AS(Expression::parse("bogus(x1)", 2), ConfigError);
  CHECK_THROWS_AS(Expression::parse("(x1", 2), ConfigError);
  CHECK_THROWS_AS(Expression::parse("x1 x2", 2), ConfigError);
}

TEST_CASE("vector fields reject y dependence") {
  CHECK_THROWS_AS(VectorFieldDef::parse({"y1", "x1"}, 2), ConfigError);
  auto v = VectorFieldDef::parse({"sin(x1)", "x2^2"}, 2);
  Vec x = (Vec(2) << M_PI / 2, 3.0).finished();
  Vec out = v.eval_d(x);
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[1] == doctest::Approx(9.0));
}
