#ifndef LGEO_GEOMETRY_HPP_
#define LGEO_GEOMETRY_HPP_

// Semi-Riemannian substrate: chart points, tangent vectors, metric and
// Christoffel evaluation, causal classification, geodesic right-hand side,
// auxiliary Riemannian norm and conserved quantities.

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lgeo/expr.hpp"

namespace lgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class GeometryError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ChartPoint {
  Vec coords;
  std::string model_id;
};

struct TangentVector {
  ChartPoint base;
  Vec components;
};

// Symmetric metric matrix g_ij at a point.
struct MetricValue {
  Mat entries;
};

enum class CausalCharacter { Timelike, Lightlike, Spacelike, Zero };

std::string to_string(CausalCharacter c);

enum class ChristoffelProvider { Analytic, FiniteDifference };

// A named candidate (conformal) Killing field K with factor sigma such that
// d/ds g(gamma',K) = sigma * g(gamma',gamma') along geodesics.
struct KillingCandidate {
  std::string name;
  std::vector<Expr> components;  // K^i as expressions of the coordinates
  Expr sigma;                    // empty means sigma == 0 (Killing)
};

// Chart-based spacetime model. Quotient manifolds are represented on their
// covering space; deck transformations are additive translations by the
// period vectors. Immutable after construction.
class SpacetimeModel {
 public:
  using MetricFn = std::function<Mat(const Vec&)>;
  using DomainFn = std::function<bool(const Vec&)>;

  SpacetimeModel() = default;

  // Analytic model from a matrix of coefficient expressions in the named
  // coordinates. Christoffels come from symbolic derivatives.
  static SpacetimeModel analytic(std::string id,
                                 std::vector<std::string> coords, int index,
                                 std::vector<std::vector<Expr>> metric);

  // Opaque-evaluator model; Christoffels by central finite differences.
  static SpacetimeModel numeric(std::string id,
                                std::vector<std::string> coords, int index,
                                MetricFn metric);

  int dimension() const { return n_; }
  int index() const { return index_; }
  const std::string& id() const { return id_; }
  const std::vector<std::string>& coords() const { return coords_; }
  ChristoffelProvider christoffel_provider() const { return provider_; }

  bool compact() const { return compact_; }
  void set_compact(bool c) { compact_ = c; }
  void set_domain(DomainFn d) { domain_ = std::move(d); }
  void set_domain_margin(double m) { domain_margin_ = m; }
  double domain_margin() const { return domain_margin_; }
  void add_period(const Vec& period) { periods_.push_back(period); }
  const std::vector<Vec>& periods() const { return periods_; }
  bool has_quotient() const { return !periods_.empty(); }
  void add_killing(KillingCandidate k) { killing_.push_back(std::move(k)); }
  const std::vector<KillingCandidate>& killing_fields() const {
    return killing_;
  }
  // Auxiliary complete Riemannian metric; defaults to chart-Euclidean.
  void set_auxiliary_metric(MetricFn g_r) { aux_metric_ = std::move(g_r); }

  bool in_domain(const Vec& p) const { return !domain_ || domain_(p); }

  // Metric coefficient expressions; only for analytic models.
  const std::vector<std::vector<Expr>>& metric_exprs() const;
  bool is_analytic() const { return !metric_exprs_.empty(); }

  Mat metric_raw(const Vec& p) const;      // no domain/validity checks
  Mat metric_derivative(const Vec& p, int k) const;  // d g_ij / d x^k
  Mat auxiliary_metric(const Vec& p) const;

  Bindings bind(const Vec& p) const;

 private:
  std::string id_;
  std::vector<std::string> coords_;
  int n_ = 0;
  int index_ = 0;
  ChristoffelProvider provider_ = ChristoffelProvider::FiniteDifference;
  std::vector<std::vector<Expr>> metric_exprs_;
  std::vector<std::vector<std::vector<Expr>>> metric_dexprs_;  // [k][i][j]
  MetricFn metric_fn_;
  MetricFn aux_metric_;
  DomainFn domain_;
  double domain_margin_ = 0.0;
  bool compact_ = false;
  std::vector<Vec> periods_;
  std::vector<KillingCandidate> killing_;
};

// Default tolerance for classifying numerically near-null vectors; this is
// an engineering choice, not fixed by theory.
inline constexpr double kNullTolerance = 1e-9;
inline constexpr double kDegeneracyTolerance = 1e-12;

MetricValue metric_at(const SpacetimeModel& m, const ChartPoint& p);

// Gamma[k](i,j), symmetric in (i,j).
std::vector<Mat> christoffel_at(const SpacetimeModel& m, const ChartPoint& p);

double inner(const SpacetimeModel& m, const TangentVector& v,
             const TangentVector& w);

CausalCharacter causal_character(const SpacetimeModel& m,
                                 const TangentVector& v,
                                 double eps_null = kNullTolerance);

struct GeodesicState {
  Vec position;
  Vec velocity;
};

// (x', v') with v'^k = -Gamma^k_ij v^i v^j.
GeodesicState geodesic_rhs(const SpacetimeModel& m, const GeodesicState& s);

double riemannian_norm(const SpacetimeModel& m, const TangentVector& v);

// Residual of the conformal-Killing conservation law d/ds g(gamma',K) =
// c * sigma(gamma) estimated over one small integrator step from `state`.
double conformal_killing_rate(const SpacetimeModel& m,
                              const KillingCandidate& k,
                              const GeodesicState& state, double c,
                              double step = 1e-4);

// Conserved charge g(gamma',K) at a state.
double killing_charge(const SpacetimeModel& m, const KillingCandidate& k,
                      const GeodesicState& state);

}  // namespace lgeo

#endif  // LGEO_GEOMETRY_HPP_
