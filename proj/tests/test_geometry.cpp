#include <doctest.h>

#include <cmath>
#include <random>

#include "lgeo/geometry.hpp"

using namespace lgeo;

namespace {

SpacetimeModel sphere_chart() {
  // Round 2-sphere in polar coordinates: dx^2 + sin^2(x) dy^2.
  return SpacetimeModel::analytic(
      "sphere", {"x", "y"}, 0,
      {{Expr::constant(1.0), Expr::constant(0.0)},
       {Expr::constant(0.0), parse("sin(x)^2")}});
}

SpacetimeModel mink2() {
  return SpacetimeModel::analytic(
      "m2", {"t", "x"}, 1,
      {{Expr::constant(-1.0), Expr::constant(0.0)},
       {Expr::constant(0.0), Expr::constant(1.0)}});
}

}  // namespace

TEST_CASE("metric_at validates symmetry, degeneracy, and index") {
  SpacetimeModel m = mink2();
  Vec p(2);
  p << 0.3, -0.2;
  Mat g = metric_at(m, {p, m.id()}).entries;
  CHECK(g(0, 0) == doctest::Approx(-1.0));

  SpacetimeModel degenerate = SpacetimeModel::analytic(
      "deg", {"t", "x"}, 1,
      {{Expr::constant(0.0), Expr::constant(0.0)},
       {Expr::constant(0.0), Expr::constant(1.0)}});
  CHECK_THROWS_AS(metric_at(degenerate, {p, "deg"}), GeometryError);

  SpacetimeModel wrong_index = SpacetimeModel::analytic(
      "wrong", {"t", "x"}, 1,
      {{Expr::constant(1.0), Expr::constant(0.0)},
       {Expr::constant(0.0), Expr::constant(1.0)}});
  CHECK_THROWS_AS(metric_at(wrong_index, {p, "wrong"}), GeometryError);
}

TEST_CASE("christoffel symbols of the sphere chart") {
  SpacetimeModel m = sphere_chart();
  Vec p(2);
  p << 0.9, 0.4;
  auto gamma = christoffel_at(m, {p, m.id()});
  CHECK(gamma[0](1, 1) == doctest::Approx(-std::sin(0.9) * std::cos(0.9)));
  CHECK(gamma[1](0, 1) == doctest::Approx(std::cos(0.9) / std::sin(0.9)));
  CHECK(gamma[0](0, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("finite-difference provider matches the analytic one") {
  SpacetimeModel a = sphere_chart();
  SpacetimeModel n = SpacetimeModel::numeric("sphere_fd", {"x", "y"}, 0,
                                             [](const Vec& p) {
                                               Mat g = Mat::Identity(2, 2);
                                               g(1, 1) = std::pow(std::sin(p(0)), 2);
                                               return g;
                                             });
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(0.5, 2.5);
  for (int trial = 0; trial < 20; ++trial) {
    Vec p(2);
    p << uni(rng), uni(rng);
    auto ga = christoffel_at(a, {p, a.id()});
    auto gn = christoffel_at(n, {p, n.id()});
    for (int k = 0; k < 2; ++k)
      CHECK((ga[k] - gn[k]).lpNorm<Eigen::Infinity>() < 1e-7);
  }
}

TEST_CASE("causal character and scale invariance") {
  SpacetimeModel m = mink2();
  Vec p = Vec::Zero(2);
  auto character = [&](double vt, double vx) {
    Vec v(2);
    v << vt, vx;
    return causal_character(m, {{p, m.id()}, v});
  };
  CHECK(character(1, 0) == CausalCharacter::Timelike);
  CHECK(character(0, 1) == CausalCharacter::Spacelike);
  CHECK(character(1, 1) == CausalCharacter::Lightlike);
  CHECK(character(0, 0) == CausalCharacter::Zero);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  std::uniform_real_distribution<double> scale(0.1, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vec v(2);
    v << uni(rng), uni(rng);
    double lam = scale(rng);
    CausalCharacter c1 = causal_character(m, {{p, m.id()}, v});
    CausalCharacter c2 = causal_character(m, {{p, m.id()}, Vec(lam * v)});
    CHECK(c1 == c2);
  }
}

TEST_CASE("geodesic right-hand side and killing charge") {
  SpacetimeModel m = mink2();
  Vec p(2), v(2);
  p << 0.0, 0.0;
  v << 2.0, 0.5;
  GeodesicState st{p, v};
  GeodesicState rhs = geodesic_rhs(m, st);
  CHECK(rhs.position == v);
  CHECK(rhs.velocity.lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));

  KillingCandidate del_t{"del_t", {Expr::constant(1.0), Expr::constant(0.0)},
                         Expr()};
  CHECK(killing_charge(m, del_t, st) == doctest::Approx(-2.0));
  CHECK(std::abs(conformal_killing_rate(m, del_t, st, 1.0)) < 1e-8);
}

TEST_CASE("auxiliary riemannian norm defaults to the chart euclidean one") {
  SpacetimeModel m = mink2();
  Vec p = Vec::Zero(2), v(2);
  v << 3.0, 4.0;
  CHECK(riemannian_norm(m, {{p, m.id()}, v}) == doctest::Approx(5.0));
}
