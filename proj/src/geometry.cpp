#include "lgeo/geometry.hpp"

#include <cmath>

namespace lgeo {
namespace {

double fd_step(double coord) {
  static const double cbrt_eps =
      std::cbrt(std::numeric_limits<double>::epsilon());
  return cbrt_eps * (1.0 + std::abs(coord));
}

void check_point(const SpacetimeModel& m, const ChartPoint& p) {
  if (p.coords.size() != m.dimension()) {
    throw GeometryError("point dimension " + std::to_string(p.coords.size()) +
                        " does not match model '" + m.id() + "' dimension " +
                        std::to_string(m.dimension()));
  }
  if (!p.model_id.empty() && p.model_id != m.id()) {
    throw GeometryError("point tagged for model '" + p.model_id +
                        "' used with model '" + m.id() + "'");
  }
  if (!m.in_domain(p.coords)) {
    throw GeometryError("point outside chart domain of model '" + m.id() +
                        "'");
  }
}

// Symmetry, finiteness, and signature (index) checks on a candidate metric
// matrix. Throws on violation.
void validate_metric(const SpacetimeModel& m, const Mat& g) {
  const int n = m.dimension();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(g(i, j))) {
        throw GeometryError("non-finite metric entry in model '" + m.id() +
                            "'");
      }
      if (std::abs(g(i, j) - g(j, i)) >
          kDegeneracyTolerance * (1.0 + std::abs(g(i, j)))) {
        throw GeometryError("metric of model '" + m.id() +
                            "' is not symmetric");
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  int neg = 0;
  double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i) {
    double lam = es.eigenvalues()[i];
    if (std::abs(lam) <= kDegeneracyTolerance * (1.0 + scale)) {
      throw GeometryError("metric of model '" + m.id() +
                          "' is degenerate at the requested point");
    }
    if (lam < 0.0) ++neg;
  }
  if (neg != m.index()) {
    throw GeometryError("metric of model '" + m.id() + "' has index " +
                        std::to_string(neg) + ", expected " +
                        std::to_string(m.index()));
  }
}

}  // namespace

std::string to_string(CausalCharacter c) {
  switch (c) {
    case CausalCharacter::Timelike:
      return "timelike";
    case CausalCharacter::Lightlike:
      return "lightlike";
    case CausalCharacter::Spacelike:
      return "spacelike";
    case CausalCharacter::Zero:
      return "zero";
  }
  return "unknown";
}

SpacetimeModel SpacetimeModel::analytic(std::string id,
                                        std::vector<std::string> coords,
                                        int index,
                                        std::vector<std::vector<Expr>> metric) {
  SpacetimeModel m;
  m.id_ = std::move(id);
  m.coords_ = std::move(coords);
  m.n_ = static_cast<int>(m.coords_.size());
  m.index_ = index;
  if (static_cast<int>(metric.size()) != m.n_) {
    throw GeometryError("metric expression matrix has wrong row count");
  }
  for (auto& row : metric) {
    if (static_cast<int>(row.size()) != m.n_) {
      throw GeometryError("metric expression matrix has wrong column count");
    }
  }
  m.metric_exprs_ = std::move(metric);
  m.provider_ = ChristoffelProvider::Analytic;
  m.metric_dexprs_.resize(m.n_);
  for (int k = 0; k < m.n_; ++k) {
    m.metric_dexprs_[k].resize(m.n_);
    for (int i = 0; i < m.n_; ++i) {
      m.metric_dexprs_[k][i].resize(m.n_);
      for (int j = 0; j < m.n_; ++j) {
        m.metric_dexprs_[k][i][j] = m.metric_exprs_[i][j].diff(m.coords_[k]);
      }
    }
  }
  return m;
}

SpacetimeModel SpacetimeModel::numeric(std::string id,
                                       std::vector<std::string> coords,
                                       int index, MetricFn metric) {
  SpacetimeModel m;
  m.id_ = std::move(id);
  m.coords_ = std::move(coords);
  m.n_ = static_cast<int>(m.coords_.size());
  m.index_ = index;
  m.metric_fn_ = std::move(metric);
  m.provider_ = ChristoffelProvider::FiniteDifference;
  return m;
}

const std::vector<std::vector<Expr>>& SpacetimeModel::metric_exprs() const {
  if (metric_exprs_.empty()) {
    throw GeometryError("model '" + id_ + "' has no analytic metric");
  }
  return metric_exprs_;
}

Bindings SpacetimeModel::bind(const Vec& p) const {
  Bindings b;
  for (int i = 0; i < n_; ++i) b[coords_[i]] = p[i];
  return b;
}

Mat SpacetimeModel::metric_raw(const Vec& p) const {
  if (!metric_exprs_.empty()) {
    Mat g(n_, n_);
    const Bindings b = bind(p);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) g(i, j) = metric_exprs_[i][j].eval(b);
    }
    return g;
  }
  return metric_fn_(p);
}

Mat SpacetimeModel::metric_derivative(const Vec& p, int k) const {
  if (!metric_dexprs_.empty()) {
    Mat d(n_, n_);
    const Bindings b = bind(p);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) d(i, j) = metric_dexprs_[k][i][j].eval(b);
    }
    return d;
  }
  const double h = fd_step(p[k]);
  Vec pp = p, pm = p;
  pp[k] += h;
  pm[k] -= h;
  return (metric_raw(pp) - metric_raw(pm)) / (2.0 * h);
}

Mat SpacetimeModel::auxiliary_metric(const Vec& p) const {
  if (aux_metric_) return aux_metric_(p);
  return Mat::Identity(n_, n_);
}

MetricValue metric_at(const SpacetimeModel& m, const ChartPoint& p) {
  check_point(m, p);
  Mat g = m.metric_raw(p.coords);
  // Symmetrize away representation noise before validating.
  g = 0.5 * (g + g.transpose().eval());
  validate_metric(m, g);
  return MetricValue{g};
}

std::vector<Mat> christoffel_at(const SpacetimeModel& m, const ChartPoint& p) {
  const MetricValue g = metric_at(m, p);
  const int n = m.dimension();
  const Mat ginv = g.entries.inverse();
  std::vector<Mat> dg(n);
  for (int k = 0; k < n; ++k) dg[k] = m.metric_derivative(p.coords, k);
  std::vector<Mat> gamma(n, Mat::Zero(n, n));
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) {
          s += ginv(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
        }
        gamma[k](i, j) = 0.5 * s;
        gamma[k](j, i) = gamma[k](i, j);
      }
    }
  }
  return gamma;
}

double inner(const SpacetimeModel& m, const TangentVector& v,
             const TangentVector& w) {
  if ((v.base.coords - w.base.coords).norm() >
      kDegeneracyTolerance * (1.0 + v.base.coords.norm())) {
    throw GeometryError("inner product of vectors at different base points");
  }
  const MetricValue g = metric_at(m, v.base);
  return v.components.dot(g.entries * w.components);
}

CausalCharacter causal_character(const SpacetimeModel& m,
                                 const TangentVector& v, double eps_null) {
  if (v.components.norm() == 0.0) return CausalCharacter::Zero;
  const double q = inner(m, v, v);
  const double scale = v.components.squaredNorm();
  if (std::abs(q) <= eps_null * scale) return CausalCharacter::Lightlike;
  return q < 0.0 ? CausalCharacter::Timelike : CausalCharacter::Spacelike;
}

GeodesicState geodesic_rhs(const SpacetimeModel& m, const GeodesicState& s) {
  const std::vector<Mat> gamma =
      christoffel_at(m, ChartPoint{s.position, m.id()});
  const int n = m.dimension();
  GeodesicState out;
  out.position = s.velocity;
  out.velocity = Vec(n);
  for (int k = 0; k < n; ++k) {
    out.velocity[k] = -s.velocity.dot(gamma[k] * s.velocity);
  }
  return out;
}

double riemannian_norm(const SpacetimeModel& m, const TangentVector& v) {
  const Mat gr = m.auxiliary_metric(v.base.coords);
  const double q = v.components.dot(gr * v.components);
  if (q < 0.0) {
    throw GeometryError("auxiliary metric of model '" + m.id() +
                        "' is not positive definite");
  }
  return std::sqrt(q);
}

double killing_charge(const SpacetimeModel& m, const KillingCandidate& k,
                      const GeodesicState& state) {
  const int n = m.dimension();
  if (static_cast<int>(k.components.size()) != n) {
    throw GeometryError("Killing field '" + k.name +
                        "' has wrong component count");
  }
  const Bindings b = m.bind(state.position);
  Vec kv(n);
  for (int i = 0; i < n; ++i) kv[i] = k.components[i].eval(b);
  const MetricValue g = metric_at(m, ChartPoint{state.position, m.id()});
  return state.velocity.dot(g.entries * kv);
}

double conformal_killing_rate(const SpacetimeModel& m,
                              const KillingCandidate& k,
                              const GeodesicState& state, double c,
                              double step) {
  // One RK4 geodesic step, then a centered difference of the charge.
  auto rk4 = [&](const GeodesicState& s, double h) {
    GeodesicState k1 = geodesic_rhs(m, s);
    GeodesicState s2{s.position + 0.5 * h * k1.position,
                     s.velocity + 0.5 * h * k1.velocity};
    GeodesicState k2 = geodesic_rhs(m, s2);
    GeodesicState s3{s.position + 0.5 * h * k2.position,
                     s.velocity + 0.5 * h * k2.velocity};
    GeodesicState k3 = geodesic_rhs(m, s3);
    GeodesicState s4{s.position + h * k3.position,
                     s.velocity + h * k3.velocity};
    GeodesicState k4 = geodesic_rhs(m, s4);
    return GeodesicState{
        s.position +
            h / 6.0 *
                (k1.position + 2.0 * k2.position + 2.0 * k3.position +
                 k4.position),
        s.velocity +
            h / 6.0 *
                (k1.velocity + 2.0 * k2.velocity + 2.0 * k3.velocity +
                 k4.velocity)};
  };
  const GeodesicState fwd = rk4(state, step);
  const GeodesicState bwd = rk4(state, -step);
  const double rate =
      (killing_charge(m, k, fwd) - killing_charge(m, k, bwd)) / (2.0 * step);
  double expected = 0.0;
  if (!k.sigma.empty()) {
    expected = c * k.sigma.eval(m.bind(state.position));
  }
  return rate - expected;
}

}  // namespace lgeo
