#include <doctest.h>

#include <cmath>
#include <random>

#include "lgeo/variational.hpp"

using namespace lgeo;

namespace {

SpacetimeModel flat_line() {
  return SpacetimeModel::analytic("line", {"x"}, 0, {{Expr::constant(1.0)}});
}

SpacetimeModel flat_plane() {
  return SpacetimeModel::analytic(
      "plane", {"x", "y"}, 0,
      {{Expr::constant(1.0), Expr::constant(0.0)},
       {Expr::constant(0.0), Expr::constant(1.0)}});
}

}  // namespace

TEST_CASE("straight path interpolates the endpoints") {
  Vec a = Vec::Zero(2), b(2);
  b << 1.0, 2.0;
  PathDiscretization path = straight_path(0.0, a, 1.0, b, 8);
  CHECK(path.segments() == 8);
  CHECK((path.node(0) - a).norm() == 0.0);
  CHECK((path.node(8) - b).norm() == 0.0);
  CHECK(path.node(4)(1) == doctest::Approx(1.0));
}

TEST_CASE("action gradient matches finite differences") {
  StationarySpec spec;
  spec.spatial = flat_plane();
  spec.beta = parse("1 + 0.5*x^2 + 0.1*y^2");
  SpacetimeModel m = static_spacetime(spec);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uni(-0.8, 0.8);
  const int N = 6;
  std::vector<Vec> nodes(N + 1);
  for (auto& z : nodes) {
    z.resize(3);
    for (int c = 0; c < 3; ++c) z(c) = uni(rng);
  }
  Vec grad = action_gradient(m, nodes);
  double h = 1e-6;
  for (int i = 1; i < N; ++i)
    for (int c = 0; c < 3; ++c) {
      auto up = nodes, dn = nodes;
      up[i](c) += h;
      dn[i](c) -= h;
      double fd = (action_value(m, up) - action_value(m, dn)) / (2 * h);
      CHECK(std::abs(grad((i - 1) * 3 + c) - fd) <= 1e-6 * (1 + std::abs(fd)));
    }
}

TEST_CASE("static reduction gradient matches finite differences") {
  StationarySpec spec;
  spec.spatial = flat_line();
  spec.beta = parse("1 + x^2");
  PathDiscretization path = straight_path(0.0, Vec::Zero(1), 1.0,
                                          Vec::Constant(1, 1.0), 8);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uni(-0.2, 0.2);
  for (auto& x : path.x) x(0) += uni(rng);
  Vec grad;
  static_J_value(spec, path, &grad);
  double h = 1e-6;
  for (int i = 0; i < 7; ++i) {
    PathDiscretization up = path, dn = path;
    up.x[i](0) += h;
    dn.x[i](0) -= h;
    double fd = (static_J_value(spec, up) - static_J_value(spec, dn)) / (2 * h);
    CHECK(std::abs(grad(i) - fd) <= 1e-6 * (1 + std::abs(fd)));
  }
}

TEST_CASE("time reconstruction hits the far endpoint") {
  StationarySpec spec;
  spec.spatial = flat_line();
  spec.beta = parse("1 + x^2");
  PathDiscretization path = straight_path(0.25, Vec::Zero(1), 1.75,
                                          Vec::Constant(1, 1.0), 16);
  auto t = reconstruct_time_static(spec, path);
  CHECK(t.front() == doctest::Approx(0.25));
  CHECK(t.back() == doctest::Approx(1.75).epsilon(1e-12));
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] > t[i - 1]);
}

TEST_CASE("reduced functional equals the static one without a shift field") {
  StationarySpec spec;
  spec.spatial = flat_line();
  spec.beta = parse("1 + x^2");
  PathDiscretization path = straight_path(0.0, Vec::Zero(1), 1.0,
                                          Vec::Constant(1, 1.0), 12);
  double j = static_J_value(spec, path);
  double j1 = stationary_J1_value(spec, path, 1.0);
  CHECK(j1 == doctest::Approx(j).epsilon(1e-12));
}

TEST_CASE("reduced acceleration of a static metric is the potential force") {
  StationarySpec spec;
  spec.spatial = flat_line();
  spec.beta = parse("1 + x^2");
  Vec x = Vec::Constant(1, 0.5), xp = Vec::Zero(1);
  Vec acc = stationary_reduced_rhs(spec, 1.0, x, xp);
  double beta = 1.25, dbeta = 1.0;
  CHECK(acc(0) == doctest::Approx(-dbeta / (2 * beta * beta)));
}

TEST_CASE("penalty cut-function values and slope") {
  auto [v0, d0] = penalty_psi(0.5, 1.0);
  CHECK(v0 == 0.0);
  CHECK(d0 == 0.0);
  auto [v1, d1] = penalty_psi(0.5, 3.0);
  CHECK(v1 == doctest::Approx(std::exp(1.0) - 2.5).epsilon(1e-14));
  CHECK(d1 == doctest::Approx(std::exp(1.0) - 2.0).epsilon(1e-14));
  CHECK_THROWS_AS(penalty_psi(0.0, 1.0), VariationalError);
  CHECK_THROWS_AS(penalty_psi(0.5, -1.0), VariationalError);
}

TEST_CASE("galerkin time norm closed form matches quadrature up to 64 modes") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  const double pi = std::acos(-1.0);
  for (int m : {1, 5, 16, 64}) {
    Vec a(m);
    for (int l = 0; l < m; ++l) a(l) = uni(rng);
    double dt = uni(rng) + 1.0;
    double closed = dt * dt;
    for (int l = 1; l <= m; ++l)
      closed += 0.5 * a(l - 1) * a(l - 1) * (l * pi) * (l * pi);
    // Composite Simpson of t'(s)^2 over [0, 1].
    const int panels = 4096;
    double acc = 0.0;
    auto tp = [&](double s) {
      double v = dt;
      for (int l = 1; l <= m; ++l)
        v += a(l - 1) * (l * pi) * std::cos(l * pi * s);
      return v * v;
    };
    double hh = 1.0 / panels;
    for (int i = 0; i < panels; ++i)
      acc += hh / 6.0 *
             (tp(i * hh) + 4.0 * tp((i + 0.5) * hh) + tp((i + 1) * hh));
    CHECK(std::abs(acc - closed) <= 1e-8 * (1 + closed));
  }
}

TEST_CASE("splitting functional gradient matches finite differences") {
  SplittingSpec spec;
  spec.spatial_dim = 1;
  spec.beta = parse("1 + 0.2*cos(t + x)");
  spec.alpha = {{parse("1 + 0.1*sin(t)")}};
  PathDiscretization path = straight_path(0.0, Vec::Zero(1), 1.0,
                                          Vec::Constant(1, 0.4), 6);
  path.a = Vec::Zero(3);
  path.a << 0.1, -0.05, 0.02;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uni(-0.1, 0.1);
  for (auto& x : path.x) x(0) += uni(rng);
  double eps = 0.25;
  Vec grad;
  splitting_penalized_value(spec, path, eps, &grad);
  double h = 1e-6;
  for (int j = 0; j < 3 + 5; ++j) {
    PathDiscretization up = path, dn = path;
    if (j < 3) {
      up.a(j) += h;
      dn.a(j) -= h;
    } else {
      up.x[j - 3](0) += h;
      dn.x[j - 3](0) -= h;
    }
    double fd = (splitting_penalized_value(spec, up, eps) -
                 splitting_penalized_value(spec, dn, eps)) /
                (2 * h);
    CHECK(std::abs(grad(j) - fd) <= 1e-6 * (1 + std::abs(fd)));
  }
}

TEST_CASE("growth diagnostics flag super-quadratic beta") {
  StationarySpec ok;
  ok.spatial = flat_line();
  ok.beta = parse("1 + x^2");
  GrowthDiagnostic g1 = growth_check(ok);
  CHECK(g1.beta_at_most_quadratic);
  CHECK(g1.beta_exponent == doctest::Approx(2.0).epsilon(0.05));

  StationarySpec bad;
  bad.spatial = flat_line();
  bad.beta = parse("1 + abs(x)^2.5");
  GrowthDiagnostic g2 = growth_check(bad);
  CHECK_FALSE(g2.beta_at_most_quadratic);
  CHECK(g2.beta_exponent == doctest::Approx(2.5).epsilon(0.05));

  StationarySpec rot;
  rot.spatial = flat_plane();
  rot.beta = Expr::constant(1.0);
  rot.delta = {parse("-0.3*y"), parse("0.3*x")};
  GrowthDiagnostic g3 = growth_check(rot);
  CHECK(g3.delta_at_most_linear);
}

TEST_CASE("newton shooting on flat space is exact") {
  SpacetimeModel m = minkowski(2);
  Vec p = Vec::Zero(2), q(2), guess(2);
  q << 2.0, 0.5;
  guess << 1.0, 1.0;
  ShootResult r = shoot_geodesic(m, p, q, guess);
  CHECK(r.converged);
  CHECK(r.endpoint_error <= 1e-10);
  CHECK(geodesic_residual(m, r.sol) <= 1e-9);
}

TEST_CASE("connectedness json embeds the schema and records") {
  StationarySpec spec;
  spec.spatial = flat_line();
  spec.beta = parse("1 + x^2");
  Vec p(2), q(2);
  p << 0, 0;
  q << 1, 1;
  ConnectednessResult r = minimize_connect_static(spec, p, q);
  REQUIRE(r.status == ConnectStatus::Found);
  std::string json = connectedness_json(r);
  CHECK(json.find("lgeo-connectedness-1") != std::string::npos);
  CHECK(json.find("\"action\"") != std::string::npos);
}
