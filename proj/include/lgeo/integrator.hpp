#ifndef LGEO_INTEGRATOR_HPP_
#define LGEO_INTEGRATOR_HPP_

// Adaptive geodesic integration (Dormand-Prince 5(4)), blow-up detection
// with maximal-parameter extrapolation, conformal reparametrization of
// lightlike geodesics, winding numbers on quotient models, CSV/JSON export.

#include <string>
#include <vector>

#include "lgeo/geometry.hpp"

namespace lgeo {

class IntegratorError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Termination { ReachedSpan, LeftDomain, BlowUp, StepUnderflow };

std::string to_string(Termination t);

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  long max_steps = 200000;
  // Blow-up threshold on |gamma'|_R; <= 0 means 1e8 * (1 + initial norm).
  double theta = 0.0;
  double span_begin = 0.0;
  double span_end = 1.0;
  bool dense_output = true;
};

// One accepted step with endpoint derivatives, enough for cubic Hermite
// interpolation of the whole state.
struct DenseSegment {
  double s0 = 0.0, s1 = 0.0;
  Vec y0, y1, f0, f1;  // state [x; v] and its derivative at both ends
};

struct GeodesicSolution {
  std::string model_id;
  std::vector<double> s;
  std::vector<Vec> points;
  std::vector<Vec> velocities;
  std::vector<double> g_vv;                  // g(gamma',gamma') per sample
  std::vector<std::string> killing_names;
  std::vector<std::vector<double>> charges;  // [field][sample]
  Termination termination = Termination::ReachedSpan;
  double b_hat = std::numeric_limits<double>::quiet_NaN();
  double confidence = std::numeric_limits<double>::quiet_NaN();
  std::vector<long> winding;
  std::vector<DenseSegment> dense;

  std::size_t size() const { return s.size(); }
};

GeodesicSolution integrate_geodesic(const SpacetimeModel& m, const Vec& point,
                                    const Vec& velocity,
                                    const IntegratorOptions& opts = {});

// Generic adaptive Dormand-Prince driver for first-order systems.
// The right-hand side returns false when the state leaves its domain.
using OdeRhs = std::function<bool(double s, const Vec& y, Vec& dy)>;

struct OdeSolution {
  std::vector<double> s;
  std::vector<Vec> y;
  Termination termination = Termination::ReachedSpan;
  std::vector<DenseSegment> dense;
};

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  long max_steps = 200000;
  bool dense_output = true;
  // Optional blow-up monitor: terminate when norm_fn(y) > theta.
  std::function<double(const Vec&)> norm_fn;
  double theta = 0.0;
};

OdeSolution integrate_ode(const OdeRhs& rhs, double s0, double s1,
                          const Vec& y0, const OdeOptions& opts = {});

Vec sample_dense_segments(const std::vector<DenseSegment>& dense, double s);

// Linear fit of 1/|gamma'|_R against s over the last accepted steps,
// extrapolated to its root. confidence is the fit RMS residual.
std::pair<double, double> estimate_max_parameter(const SpacetimeModel& m,
                                                 const GeodesicSolution& sol,
                                                 int window = 20);

struct ReparamResult {
  GeodesicSolution sol;     // same points, parameter sigma, dgamma/dsigma
  double max_residual;      // sup |w' + Gamma*(w,w)| over samples
};

// Reparametrize a lightlike geodesic of g as a geodesic of omega * g,
// with dsigma/dt = C * omega(gamma(t)).
ReparamResult lightlike_reparam(const SpacetimeModel& m,
                                const GeodesicSolution& sol, const Expr& omega,
                                double C);

// Net deck periods traversed, from the continuous lift.
std::vector<long> winding_of(const GeodesicSolution& sol,
                             const SpacetimeModel& m);

// Hermite interpolation of the state at parameter s inside the span.
GeodesicState sample_dense(const GeodesicSolution& sol, double s);

// Header: s, x1..xn, v1..vn, g_vv, K1..Km
std::string trajectory_csv(const SpacetimeModel& m,
                           const GeodesicSolution& sol);
// {termination, b_hat, confidence, winding}
std::string summary_json(const GeodesicSolution& sol);

}  // namespace lgeo

#endif  // LGEO_INTEGRATOR_HPP_
