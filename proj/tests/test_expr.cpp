#include <doctest.h>

#include <cmath>
#include <random>

#include "lgeo/expr.hpp"

using namespace lgeo;

namespace {

// Random expressions over {x, y} restricted to operations that are total,
// so both evaluation and the finite-difference probe stay in-domain.
Expr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 6);
  switch (pick(rng)) {
    case 0:
      return Expr::constant(uni(rng));
    case 1:
      return Expr::variable("x");
    case 2:
      return Expr::variable("y");
    case 3:
      return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 4:
      return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
    case 5:
      return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    default:
      return std::uniform_int_distribution<int>(0, 1)(rng) == 0
                 ? apply_unary(UnaryOp::Sin, random_expr(rng, depth - 1))
                 : apply_unary(UnaryOp::Cos, random_expr(rng, depth - 1));
  }
}

}  // namespace

TEST_CASE("parse and evaluate basics") {
  CHECK(parse("1 + 2*3").eval({}) == doctest::Approx(7.0));
  CHECK(parse("2^3^2").eval({}) == doctest::Approx(512.0));  // right assoc
  CHECK(parse("-x^2").eval({{"x", 3.0}}) == doctest::Approx(-9.0));
  CHECK(parse("sin(pi/2)").eval({}) == doctest::Approx(1.0));
  CHECK(parse("ln(e)").eval({}) == doctest::Approx(1.0));
  CHECK(parse("sqrt(abs(-4))").eval({}) == doctest::Approx(2.0));
  CHECK(parse("cosh(x)^2 - sinh(x)^2").eval({{"x", 0.7}}) ==
        doctest::Approx(1.0));
}

TEST_CASE("parse errors carry a byte offset") {
  CHECK_THROWS_AS(parse("1 + * 2"), ExprError);
  CHECK_THROWS_AS(parse("sin(1"), ExprError);
  CHECK_THROWS_AS(parse(""), ExprError);
  CHECK_THROWS_AS(parse("unknownfn(1)"), ExprError);
}

TEST_CASE("evaluation domain errors") {
  CHECK_THROWS_AS(parse("ln(x)").eval({{"x", -1.0}}), EvalError);
  CHECK_THROWS_AS(parse("sqrt(x)").eval({{"x", -1.0}}), EvalError);
  CHECK_THROWS_AS(parse("1/x").eval({{"x", 0.0}}), EvalError);
  CHECK_THROWS_AS(parse("x+1").eval({}), EvalError);  // unbound variable
}

TEST_CASE("known symbolic derivatives") {
  Bindings b{{"x", 0.8}};
  CHECK(parse("x^3").diff("x").eval(b) == doctest::Approx(3 * 0.8 * 0.8));
  CHECK(parse("sin(2*x)").diff("x").eval(b) ==
        doctest::Approx(2 * std::cos(1.6)));
  CHECK(parse("exp(x^2)").diff("x").eval(b) ==
        doctest::Approx(2 * 0.8 * std::exp(0.64)));
  CHECK(parse("x/(1+x)").diff("x").eval(b) ==
        doctest::Approx(1.0 / ((1 + 0.8) * (1 + 0.8))));
  CHECK_THROWS_AS(parse("abs(x)").diff("x"), ExprError);
}

TEST_CASE("derivative matches finite differences on random expressions") {
  std::mt19937_64 rng(20240824);
  std::uniform_real_distribution<double> uni(-1.5, 1.5);
  const double h = 1e-5;
  for (int trial = 0; trial < 1000; ++trial) {
    Expr e = random_expr(rng, 4);
    Expr dx = e.diff("x");
    Bindings b{{"x", uni(rng)}, {"y", uni(rng)}};
    Bindings bp = b, bm = b;
    bp["x"] += h;
    bm["x"] -= h;
    double fd = (e.eval(bp) - e.eval(bm)) / (2 * h);
    double sym = dx.eval(b);
    CHECK(std::abs(sym - fd) <= 1e-6 * (1.0 + std::abs(sym)));
  }
}

TEST_CASE("print then reparse preserves values") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-1.5, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    Expr e = random_expr(rng, 4);
    Expr back = parse(e.print());
    for (int j = 0; j < 5; ++j) {
      Bindings b{{"x", uni(rng)}, {"y", uni(rng)}};
      CHECK(back.eval(b) == doctest::Approx(e.eval(b)).epsilon(1e-12));
    }
  }
}

TEST_CASE("variables lists each name once") {
  auto vars = parse("x*sin(y) + x^2").variables();
  CHECK(vars.size() == 2);
}
