#ifndef LGEO_CATALOG_HPP_
#define LGEO_CATALOG_HPP_

// Named spacetime constructors (Minkowski, tau/EFG tori, Clifton-Pohl,
// Misner cylinder, GRW, warped products, standard static/stationary,
// orthogonal splitting, anti-de Sitter strip, de Sitter pseudosphere),
// plus closed-form pseudosphere geodesics and the connectability test.

#include <map>
#include <string>
#include <vector>

#include "lgeo/geometry.hpp"

namespace lgeo {

struct WarpedSpec {
  SpacetimeModel base;
  Expr f;  // positive, function of base coordinates
  SpacetimeModel fiber;
};

// Standard stationary data on R x M0:
//   g = -beta dt^2 + <.,.>_R + 2 <delta, .>_R dt.
// delta empty means static.
struct StationarySpec {
  SpacetimeModel spatial;  // Riemannian (index 0), analytic
  Expr beta;               // positive on M0
  std::vector<Expr> delta;
};

// Orthogonal splitting g = -beta(t,x) dt^2 + <alpha(t,x) xi, xi>_R on a
// flat spatial chart; nu <= beta <= N and eig(alpha) >= lambda sampled.
struct SplittingSpec {
  int spatial_dim = 1;
  Expr beta;
  std::vector<std::vector<Expr>> alpha;
  double nu = 0.0, N = 0.0, lambda = 0.0;
};

using Params = std::map<std::string, std::string>;

class CatalogError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

SpacetimeModel minkowski(int n, int index = 1);
SpacetimeModel torus_tau(const Expr& tau);
SpacetimeModel torus_efg(const Expr& E, const Expr& F, const Expr& G);
SpacetimeModel clifton_pohl();
// Misner chart (x, y): dx dy + dy dx + tau(x) dy^2 with tau = -2x,
// deck translation (x, y) -> (x, y + log 2).
SpacetimeModel misner_cylinder();
// Covering chart {u > 0}: du dv + dv du, no quotient structure (the deck
// map (u,v) -> (2u, v/2) is not a translation).
SpacetimeModel misner_covering_uv();
Vec misner_chart_to_uv(const Vec& xy);  // u = e^y, v = x e^{-y}
Vec misner_uv_to_chart(const Vec& uv);

SpacetimeModel grw(const Expr& f, double a, double b,
                   const SpacetimeModel& fiber);
SpacetimeModel grw(const Expr& f, double a, double b, int fiber_dim = 1);
SpacetimeModel warped(const WarpedSpec& spec);
SpacetimeModel static_spacetime(const StationarySpec& spec);
SpacetimeModel stationary(const StationarySpec& spec);
SpacetimeModel splitting(const SplittingSpec& spec);
SpacetimeModel anti_de_sitter_strip(double margin = 1e-9);
// Global (w, phi) chart of the 2-dimensional pseudosphere: -dw^2 +
// cosh^2(w) dphi^2, period (0, 2 pi). Higher n only via the closed forms.
SpacetimeModel pseudosphere_model();

// Generic dispatcher for config/CLI use; parameter values are expression
// or number strings.
SpacetimeModel build(const std::string& id, const Params& params = {});
std::vector<std::string> catalog_ids();

SpacetimeModel conformal_model(const SpacetimeModel& m, const Expr& omega);

double gauss_curvature_torus_tau(const Expr& tau, double x);

struct PseudospherePoint {
  Vec ambient;  // in R^{n+1}_1, <p,p>_1 = 1 within 1e-10
};

// <x,y>_1 = -x0 y0 + sum_i xi yi.
double lorentz_inner(const Vec& x, const Vec& y);

PseudospherePoint pseudosphere_geodesic(const PseudospherePoint& p,
                                        const Vec& v, double s);
bool pseudosphere_connectable(const PseudospherePoint& p,
                              const PseudospherePoint& q);

}  // namespace lgeo

#endif  // LGEO_CATALOG_HPP_
