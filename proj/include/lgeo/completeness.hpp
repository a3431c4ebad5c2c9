#ifndef LGEO_COMPLETENESS_HPP_
#define LGEO_COMPLETENESS_HPP_

// Checkable completeness criteria: improper-integral divergence proxy,
// GRW per-causal-type classification, warped-product radial criteria with
// f_inf profiles, warped geodesic projection, Killing-based certificates.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lgeo/catalog.hpp"
#include "lgeo/integrator.hpp"

namespace lgeo {

class CompletenessError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Divergence { Diverges, Converges, Inconclusive };
enum class Verdict { Complete, Incomplete, Inconclusive };

std::string to_string(Divergence d);
std::string to_string(Verdict v);

struct DivergenceReport {
  Divergence classification = Divergence::Inconclusive;
  std::vector<double> partials;   // cumulative integral per octave
  double growth_exponent = 0.0;   // fitted log2 growth of octave increments
  double value = 0.0;             // accumulated integral (meaningful when
                                  // Converges)
};

struct IntegralOptions {
  double start = 0.0;
  int octaves = 40;
  int panels_per_octave = 64;
  double diverge_factor = 1.05;   // per-octave growth for the last 5 octaves
  double converge_tail = 1e-8;    // tail fraction of the accumulated value
};

// Classify whether the integral of `integrand` from opts.start toward
// `endpoint` (finite or +-infinity) diverges, on a geometric grid.
DivergenceReport improper_integral_verdict(
    const std::function<double(double)>& integrand, double endpoint,
    const IntegralOptions& opts = {});
DivergenceReport improper_integral_verdict(const Expr& integrand,
                                           double endpoint,
                                           const IntegralOptions& opts = {});

struct Evidence {
  std::string criterion;
  std::map<std::string, std::string> values;
  std::string citation;
};

struct CompletenessVerdict {
  Verdict timelike = Verdict::Inconclusive;
  Verdict lightlike = Verdict::Inconclusive;
  Verdict spacelike = Verdict::Inconclusive;
  std::vector<Evidence> evidence;
};

std::string verdict_json(const CompletenessVerdict& v);

// Per-end classification of -dt^2 + f(t)^2 g_F on (a, b):
// timelike complete iff both tails of f/sqrt(1+f^2) diverge; lightlike iff
// both tails of f diverge; spacelike iff the lightlike condition holds or
// every finite f-tail has unbounded f on that side.
CompletenessVerdict classify_grw(const Expr& f, double a, double b,
                                 bool fiber_complete);

// min{f(x) : d(x, x0) = r} for each radius; exact on 1-D bases, sampled
// directions on flat Euclidean bases, rejected otherwise.
std::vector<double> f_inf_profile(const SpacetimeModel& base, const Expr& f,
                                  const Vec& x0,
                                  const std::vector<double>& radii,
                                  int directions = 256);

// Warped triple (base, f, fiber) classification via the f_inf integrals;
// the incompleteness converses are applied only when the profile is exact
// (1-D base) or f is declared radial.
CompletenessVerdict classify_warped_radial(const SpacetimeModel& base,
                                           const Expr& f, const Vec& x0,
                                           bool fiber_complete,
                                           bool f_radial = false);

// Projected geodesic on the base: D gamma_B'/dt = (C/f^3) grad f, with the
// causal label from D = g_B(gamma_B', gamma_B') + C/f^2.
struct WarpedProjection {
  OdeSolution ode;           // state [x_B; x_B']
  double causal_constant;    // D, sampled at the initial state
  CausalCharacter character; // sign of D
};

WarpedProjection warped_projection_integrate(const WarpedSpec& spec, double C,
                                             const Vec& base_point,
                                             const Vec& base_velocity,
                                             double span,
                                             const OdeOptions& opts = {});

// Numerical certificate for the Killing-field completeness hypotheses:
// conformal-Killing identity residual, causal character of the span,
// boundedness of sigma and of sum (g^{ij})^2, compactness flag.
struct CertificateCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct KillingCertificate {
  bool pointwise_ok = false;  // all sampled hypotheses hold
  bool compact = false;
  std::vector<CertificateCheck> checks;
  std::string summary;  // "Certified", "Certified (noncompact)", "Refuted: .."
};

KillingCertificate killing_certificate(const SpacetimeModel& m,
                                       double tolerance = 1e-6,
                                       int samples = 200);

}  // namespace lgeo

#endif  // LGEO_COMPLETENESS_HPP_
