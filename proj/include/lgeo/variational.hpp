#ifndef LGEO_VARIATIONAL_HPP_
#define LGEO_VARIATIONAL_HPP_

// Discretized path spaces and geodesic-connectedness solvers: the action
// functional and its gradient, the static reduction J with time
// reconstruction, the stationary reduced ODE and functional J1, the
// penalized splitting functional with a Galerkin time basis and saddle
// search, winding-class multistarts, and growth diagnostics.

#include <optional>
#include <string>
#include <vector>

#include "lgeo/catalog.hpp"
#include "lgeo/integrator.hpp"

namespace lgeo {

class VariationalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Piecewise-linear spatial path on the uniform grid s_i = i/N with exact
// endpoints; time is either reconstructed (static/stationary) or carried
// by Galerkin coefficients a_l over sin(l pi s) on top of the affine
// interpolant t_p + s (t_q - t_p).
struct PathDiscretization {
  double t_p = 0.0, t_q = 0.0;
  Vec x_p, x_q;
  std::vector<Vec> x;  // interior nodes x_1..x_{N-1}
  Vec a;               // Galerkin time coefficients (may be empty)

  int segments() const { return static_cast<int>(x.size()) + 1; }
  Vec node(int i) const;  // spatial node for i = 0..N
};

PathDiscretization straight_path(double t_p, const Vec& x_p, double t_q,
                                 const Vec& x_q, int N);

// Discretized action of a nodal curve in the full spacetime (midpoint
// quadrature on the piecewise-linear interpolant); gradient is over the
// stacked interior nodes.
double action_value(const SpacetimeModel& m, const std::vector<Vec>& nodes);
Vec action_gradient(const SpacetimeModel& m, const std::vector<Vec>& nodes);

// Static reduction J(x) = int <x',x'>_R ds - Delta_t^2 / int (1/beta) ds.
double static_J_value(const StationarySpec& spec,
                      const PathDiscretization& path, Vec* grad = nullptr);

// Nodal time values t(s_0)..t(s_N). Static mode distributes Delta_t
// proportionally to 1/beta; stationary mode integrates
// t' = (<delta, x'>_R - C) / beta.
std::vector<double> reconstruct_time_static(const StationarySpec& spec,
                                            const PathDiscretization& path);
std::vector<double> reconstruct_time_stationary(const StationarySpec& spec,
                                                const PathDiscretization& path,
                                                double C, double t_p);

enum class ConnectStatus { Found, NotFound, MaxIterations };
std::string to_string(ConnectStatus s);

struct GeodesicRecord {
  GeodesicSolution trajectory;
  double action = 0.0;
  double grad_norm_exit = 0.0;
  double residual = 0.0;        // finite-difference geodesic ODE residual
  double endpoint_error = 0.0;
  std::vector<long> winding;
  double C_gamma = 0.0, q = 0.0;
  double drift_C = 0.0, drift_q = 0.0;
};

struct ConnectednessResult {
  ConnectStatus status = ConnectStatus::NotFound;
  std::string diagnostic;
  std::vector<GeodesicRecord> records;
};

std::string connectedness_json(const ConnectednessResult& r);

struct ConnectOptions {
  int N = 64;            // spatial segments
  int m_modes = 16;      // Galerkin time modes
  double epsilon = 0.0;  // penalty parameter; 0 = 1/(4 (Delta_t^2 + 1))
  int max_iters = 2000;
  double grad_tol_scale = 1e-8;  // converged when |grad| <= scale * N
  double node_bound = 1e6;
  int windings = 0;
};

// Events p, q are full chart points (t, x...) of the assembled spacetime.
ConnectednessResult minimize_connect_static(const StationarySpec& spec,
                                            const Vec& p, const Vec& q,
                                            const ConnectOptions& opts = {});

ConnectednessResult multistart_windings(const StationarySpec& spec,
                                        const Vec& p, const Vec& q, int K_max,
                                        const ConnectOptions& opts = {});

// x'' for the reduced spatial equation of a standard stationary metric
// at conserved charge C = <gamma', del_t>.
Vec stationary_reduced_rhs(const StationarySpec& spec, double C, const Vec& x,
                           const Vec& xp);

// State [x; x'; t]; t integrated along via the conserved-charge relation.
OdeSolution stationary_reduced_integrate(const StationarySpec& spec, double C,
                                         double t0, const Vec& x0,
                                         const Vec& v0, double span,
                                         const OdeOptions& opts = {});

ConnectednessResult stationary_connect_shooting(const StationarySpec& spec,
                                                const Vec& p, const Vec& q,
                                                const ConnectOptions& opts = {});

double stationary_J1_value(const StationarySpec& spec,
                           const PathDiscretization& path, double delta_t);

// Penalty cut-function: 0 on [0, 1/eps], then exp(d) - 1 - d - d^2/2 with
// d = s - 1/eps. Returns (psi, psi').
std::pair<double, double> penalty_psi(double eps, double s);

// Penalized splitting functional over (a_1..a_m, interior nodes); the
// gradient is stacked in that order.
double splitting_penalized_value(const SplittingSpec& spec,
                                 const PathDiscretization& path, double eps,
                                 Vec* grad = nullptr);

ConnectednessResult solve_splitting_saddle(const SplittingSpec& spec,
                                           const Vec& p, const Vec& q,
                                           const ConnectOptions& opts = {});

struct GrowthDiagnostic {
  double beta_coefficient = 0.0;
  double beta_exponent = 0.0;
  bool beta_at_most_quadratic = false;
  double delta_slope = 0.0;
  double delta_exponent = 0.0;
  bool delta_at_most_linear = false;
};

GrowthDiagnostic growth_check(const StationarySpec& spec,
                              double box_radius = 64.0);

// Newton shooting for the two-point geodesic problem on span [0, 1].
struct ShootResult {
  GeodesicSolution sol;
  double endpoint_error = std::numeric_limits<double>::infinity();
  bool converged = false;
};

ShootResult shoot_geodesic(const SpacetimeModel& m, const Vec& p, const Vec& q,
                           const Vec& v_guess, int max_iters = 60);

// Max |dv/ds + Gamma(v, v)| over probe points, with dv/ds from central
// differences of the dense output.
double geodesic_residual(const SpacetimeModel& m, const GeodesicSolution& sol,
                         int probes = 64);

}  // namespace lgeo

#endif  // LGEO_VARIATIONAL_HPP_
