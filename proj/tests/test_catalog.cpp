#include <doctest.h>

#include <cmath>
#include <random>

#include "lgeo/catalog.hpp"

using namespace lgeo;

TEST_CASE("minkowski metric and killing fields") {
  SpacetimeModel m = minkowski(4);
  Vec p = Vec::Zero(4);
  Mat g = m.metric_raw(p);
  CHECK(g(0, 0) == -1.0);
  CHECK(g(1, 1) == 1.0);
  CHECK(g(3, 3) == 1.0);
  CHECK(m.killing_fields().size() >= 1);
}

TEST_CASE("torus_efg with E=0, F=1, G=-tau matches torus_tau") {
  Expr tau = parse("-sin(2*pi*x)/pi");
  SpacetimeModel a = torus_tau(tau);
  SpacetimeModel b = torus_efg(Expr::constant(0.0), Expr::constant(1.0),
                               parse("sin(2*pi*x)/pi"));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vec p(2);
    p << uni(rng), uni(rng);
    CHECK((a.metric_raw(p) - b.metric_raw(p)).lpNorm<Eigen::Infinity>() <=
          1e-15);
  }
}

TEST_CASE("deck invariance of quotient metrics") {
  SpacetimeModel torus = torus_tau(parse("-sin(2*pi*x)/pi"));
  SpacetimeModel misner = misner_cylinder();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vec p(2);
    p << uni(rng), uni(rng);
    for (const auto& period : torus.periods())
      CHECK((torus.metric_raw(p) - torus.metric_raw(p + period))
                .lpNorm<Eigen::Infinity>() <= 1e-12);
    for (const auto& period : misner.periods())
      CHECK((misner.metric_raw(p) - misner.metric_raw(p + period))
                .lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("clifton-pohl chart excludes the origin") {
  SpacetimeModel m = clifton_pohl();
  Vec origin = Vec::Zero(2), p(2);
  p << 1.0, 0.5;
  CHECK_FALSE(m.in_domain(origin));
  CHECK(m.in_domain(p));
  CHECK(m.metric_raw(p)(0, 1) == doctest::Approx(1.0 / 1.25));
}

TEST_CASE("misner chart/covering coordinate maps are inverse") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vec xy(2);
    xy << uni(rng), uni(rng);
    Vec back = misner_uv_to_chart(misner_chart_to_uv(xy));
    CHECK((back - xy).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
  // The deck translation y -> y + log 2 acts as (u, v) -> (2u, v/2).
  Vec xy(2);
  xy << 0.7, -0.3;
  Vec uv = misner_chart_to_uv(xy);
  Vec xy_shift = xy;
  xy_shift(1) += std::log(2.0);
  Vec uv_shift = misner_chart_to_uv(xy_shift);
  CHECK(uv_shift(0) == doctest::Approx(2.0 * uv(0)));
  CHECK(uv_shift(1) == doctest::Approx(0.5 * uv(1)));
}

TEST_CASE("warped product with unit warping is the direct product") {
  WarpedSpec spec;
  spec.base = SpacetimeModel::analytic("base", {"r"}, 0,
                                       {{parse("1 + r^2")}});
  spec.f = Expr::constant(1.0);
  spec.fiber = SpacetimeModel::analytic(
      "fiber", {"u", "v"}, 1,
      {{Expr::constant(-1.0), Expr::constant(0.0)},
       {Expr::constant(0.0), Expr::constant(1.0)}});
  SpacetimeModel w = warped(spec);
  Vec p(3);
  p << 0.4, 1.0, -2.0;
  Mat g = w.metric_raw(p);
  CHECK(g(0, 0) == doctest::Approx(1.16));
  CHECK(g(1, 1) == doctest::Approx(-1.0));
  CHECK(g(2, 2) == doctest::Approx(1.0));
  CHECK(g(0, 1) == 0.0);
}

TEST_CASE("grw metric is -dt^2 + f(t)^2 times the fiber metric") {
  SpacetimeModel m = grw(parse("exp(t)"), -10.0, 10.0, 2);
  Vec p(3);
  p << 0.5, 1.0, 2.0;
  Mat g = m.metric_raw(p);
  double f2 = std::exp(1.0);
  CHECK(g(0, 0) == doctest::Approx(-1.0));
  CHECK(g(1, 1) == doctest::Approx(f2));
  CHECK(g(2, 2) == doctest::Approx(f2));
  Vec outside(3);
  outside << 11.0, 0.0, 0.0;
  CHECK_FALSE(m.in_domain(outside));
}

TEST_CASE("stationary assembly produces the expected block structure") {
  StationarySpec spec;
  spec.spatial = SpacetimeModel::analytic(
      "plane", {"x", "y"}, 0,
      {{Expr::constant(1.0), Expr::constant(0.0)},
       {Expr::constant(0.0), Expr::constant(1.0)}});
  spec.beta = parse("1 + x^2");
  spec.delta = {parse("-0.3*y"), parse("0.3*x")};
  SpacetimeModel m = stationary(spec);
  Vec p(3);
  p << 0.0, 1.0, 2.0;
  Mat g = m.metric_raw(p);
  CHECK(g(0, 0) == doctest::Approx(-2.0));       // -beta
  CHECK(g(0, 1) == doctest::Approx(-0.6));       // (g_R delta)_x
  CHECK(g(0, 2) == doctest::Approx(0.3));        // (g_R delta)_y
  CHECK(g(1, 1) == doctest::Approx(1.0));
  CHECK(m.killing_fields().size() == 1);
}

TEST_CASE("splitting validates the coefficient bounds") {
  SplittingSpec bad;
  bad.spatial_dim = 1;
  bad.beta = Expr::constant(1.0);
  bad.alpha = {{Expr::constant(-1.0)}};
  bad.lambda = 0.5;
  CHECK_THROWS_AS(splitting(bad), CatalogError);

  SplittingSpec ok = bad;
  ok.alpha = {{parse("1 + 0.1*sin(t)")}};
  SpacetimeModel m = splitting(ok);
  CHECK(m.dimension() == 2);
}

TEST_CASE("conformal factor must stay positive") {
  SpacetimeModel m = minkowski(2);
  CHECK_THROWS_AS(conformal_model(m, Expr::constant(-1.0)), CatalogError);
  SpacetimeModel c = conformal_model(m, parse("exp(2*sin(t + x))"));
  Vec p(2);
  p << 0.3, 0.1;
  double omega = std::exp(2 * std::sin(0.4));
  CHECK(c.metric_raw(p)(0, 0) == doctest::Approx(-omega));
}

TEST_CASE("gauss curvature of the tau torus follows tau''/2") {
  Expr tau = parse("-sin(2*pi*x)/pi");
  Expr tau2 = tau.diff("x").diff("x");
  for (double x : {0.1, 0.35, 0.8}) {
    CHECK(gauss_curvature_torus_tau(tau, x) ==
          doctest::Approx(tau2.eval({{"x", x}}) / 2.0));
  }
}

TEST_CASE("pseudosphere geodesics stay on the surface") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    double a = uni(rng), phi = 3.0 * uni(rng);
    Vec p(3);
    p << std::sinh(a), std::cosh(a) * std::cos(phi),
        std::cosh(a) * std::sin(phi);
    Vec v(3);
    v << uni(rng), uni(rng), uni(rng);
    // Project to the tangent space: <p, v>_1 = 0.
    v -= lorentz_inner(p, v) * p;  // <p,p>_1 = 1, so this is the projection
    PseudospherePoint pp{p};
    for (double s : {-100.0, -7.3, 0.0, 2.5, 100.0}) {
      Vec q = pseudosphere_geodesic(pp, v, s).ambient;
      // Relative: timelike planes grow like cosh(s), and cosh^2 - sinh^2
      // only holds to machine precision of the squared magnitude.
      CHECK(std::abs(lorentz_inner(q, q) - 1.0) <=
            1e-12 * (1.0 + q.squaredNorm()));
    }
  }
}

TEST_CASE("pseudosphere connectability threshold") {
  Vec north(3), south(3), equator(3);
  north << 0, 0, 1;
  south << 0, 0, -1;
  equator << 0, 1, 0;
  CHECK(pseudosphere_connectable({north}, {equator}));
  CHECK_FALSE(pseudosphere_connectable({north}, {south}));
  CHECK(pseudosphere_connectable({north}, {north}));
}

TEST_CASE("build dispatcher") {
  CHECK_THROWS_AS(build("no_such_model"), CatalogError);
  CHECK_THROWS_AS(build("torus_tau"), CatalogError);  // missing tau
  SpacetimeModel m = build("torus_tau", {{"tau", "-sin(2*pi*x)/pi"}});
  CHECK(m.dimension() == 2);
  CHECK(m.compact());
  SpacetimeModel g = build("grw", {{"f", "exp(t)"}, {"interval", "-inf:inf"}});
  CHECK(g.dimension() == 2);
  for (const auto& id : catalog_ids()) CHECK_FALSE(id.empty());
}
