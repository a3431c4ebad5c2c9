#include "lgeo/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"

namespace lgeo {
namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kB5[7] = {35.0 / 384,    0.0,           500.0 / 1113,
                           125.0 / 192,   -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,  0.0,          7571.0 / 16695,
                           393.0 / 640,     -92097.0 / 339200,
                           187.0 / 2100,    1.0 / 40};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(Termination t) {
  switch (t) {
    case Termination::ReachedSpan:
      return "ReachedSpan";
    case Termination::LeftDomain:
      return "LeftDomain";
    case Termination::BlowUp:
      return "BlowUp";
    case Termination::StepUnderflow:
      return "StepUnderflow";
  }
  return "unknown";
}

OdeSolution integrate_ode(const OdeRhs& rhs, double s0, double s1,
                          const Vec& y0, const OdeOptions& opts) {
  (void)kC;  // stages are autonomous in s for all our systems
  if (opts.rtol <= 0.0 || opts.atol <= 0.0 || opts.max_steps <= 0) {
    throw IntegratorError("tolerances and step budget must be positive");
  }
  const double span = s1 - s0;
  if (span == 0.0) throw IntegratorError("empty integration span");
  const double dir = span > 0.0 ? 1.0 : -1.0;
  const double h_min = 1e-14 * std::abs(span);
  const int dim = static_cast<int>(y0.size());

  OdeSolution sol;
  double s = s0;
  Vec y = y0;
  sol.s.push_back(s);
  sol.y.push_back(y);

  Vec f0(dim);
  if (!rhs(s, y, f0) || !f0.allFinite()) {
    throw IntegratorError("right-hand side fails at initial state");
  }

  double h = dir * std::min(1e-3 * std::abs(span),
                            0.1 / std::max(1.0, f0.norm()));
  sol.termination = Termination::ReachedSpan;

  Vec k[7];
  Vec f1(dim), yi(dim), y1(dim), err(dim);
  for (long step = 0; step < opts.max_steps; ++step) {
    if (dir * (s - s1) >= 0.0) break;
    if (dir * (s + h - s1) > 0.0) h = s1 - s;

    bool domain_failure = false;
    k[0] = f0;
    bool stages_ok = true;
    for (int i = 1; i < 7; ++i) {
      yi = y;
      for (int j = 0; j < i; ++j) yi += h * kA[i][j] * k[j];
      k[i].resize(dim);
      if (!rhs(s + kC[i] * h, yi, k[i]) || !k[i].allFinite()) {
        stages_ok = false;
        domain_failure = true;
        break;
      }
    }
    double err_norm = 2.0;
    if (stages_ok) {
      y1 = y;
      err.setZero();
      for (int i = 0; i < 7; ++i) {
        y1 += h * kB5[i] * k[i];
        err += h * (kB5[i] - kB4[i]) * k[i];
      }
      if (!y1.allFinite()) {
        domain_failure = true;
      } else {
        double acc = 0.0;
        for (int i = 0; i < dim; ++i) {
          const double sc =
              opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
          acc += std::pow(err[i] / sc, 2);
        }
        err_norm = std::sqrt(acc / dim);
        domain_failure = false;
      }
    }

    if (domain_failure || err_norm > 1.0) {
      const double shrink =
          domain_failure ? 0.5
                         : std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
      h *= shrink;
      if (std::abs(h) < h_min) {
        sol.termination = domain_failure ? Termination::LeftDomain
                                         : Termination::StepUnderflow;
        break;
      }
      continue;
    }

    if (!rhs(s + h, y1, f1) || !f1.allFinite()) {
      sol.termination = Termination::LeftDomain;
      break;
    }
    if (opts.dense_output) {
      sol.dense.push_back(DenseSegment{s, s + h, y, y1, f0, f1});
    }
    s += h;
    y = y1;
    f0 = f1;
    sol.s.push_back(s);
    sol.y.push_back(y);

    if (opts.norm_fn && opts.theta > 0.0 && opts.norm_fn(y) > opts.theta) {
      sol.termination = Termination::BlowUp;
      break;
    }

    h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err_norm, 1e-10),
                                                    -0.2)));
    if (std::abs(h) < h_min) {
      sol.termination = Termination::StepUnderflow;
      break;
    }
    if (step + 1 == opts.max_steps) {
      sol.termination = Termination::StepUnderflow;
    }
  }
  return sol;
}

GeodesicSolution integrate_geodesic(const SpacetimeModel& m, const Vec& point,
                                    const Vec& velocity,
                                    const IntegratorOptions& opts) {
  const int n = m.dimension();
  if (point.size() != n || velocity.size() != n) {
    throw IntegratorError("state dimension does not match model");
  }
  if (!m.in_domain(point)) {
    throw IntegratorError("initial point outside chart domain");
  }
  if (!velocity.allFinite() || !point.allFinite()) {
    throw IntegratorError("initial state must be finite");
  }

  const double v0_norm =
      riemannian_norm(m, TangentVector{ChartPoint{point, m.id()}, velocity});
  const double theta = opts.theta > 0.0 ? opts.theta : 1e8 * (1.0 + v0_norm);
  if (theta <= v0_norm) {
    throw IntegratorError("blow-up threshold below initial velocity norm");
  }

  OdeOptions oo;
  oo.rtol = opts.rtol;
  oo.atol = opts.atol;
  oo.max_steps = opts.max_steps;
  oo.dense_output = opts.dense_output;
  oo.theta = theta;
  oo.norm_fn = [&m](const Vec& y) {
    const int d = static_cast<int>(y.size()) / 2;
    return riemannian_norm(
        m, TangentVector{ChartPoint{y.head(d), m.id()}, Vec(y.tail(d))});
  };
  OdeRhs rhs = [&m, n](double, const Vec& y, Vec& dy) {
    Vec x = y.head(n), v = y.tail(n);
    if (!y.allFinite() || !m.in_domain(x)) return false;
    try {
      GeodesicState d = geodesic_rhs(m, GeodesicState{x, v});
      dy.resize(2 * n);
      dy.head(n) = d.position;
      dy.tail(n) = d.velocity;
      return true;
    } catch (const GeometryError&) {
      return false;
    }
  };

  Vec y0(2 * n);
  y0.head(n) = point;
  y0.tail(n) = velocity;
  OdeSolution ode =
      integrate_ode(rhs, opts.span_begin, opts.span_end, y0, oo);

  GeodesicSolution sol;
  sol.model_id = m.id();
  sol.termination = ode.termination;
  sol.dense = std::move(ode.dense);
  for (const auto& k : m.killing_fields()) {
    sol.killing_names.push_back(k.name);
    sol.charges.emplace_back();
  }
  for (std::size_t i = 0; i < ode.s.size(); ++i) {
    const Vec x = ode.y[i].head(n), v = ode.y[i].tail(n);
    sol.s.push_back(ode.s[i]);
    sol.points.push_back(x);
    sol.velocities.push_back(v);
    const Mat g = m.metric_raw(x);
    sol.g_vv.push_back(v.dot(g * v));
    for (std::size_t ki = 0; ki < m.killing_fields().size(); ++ki) {
      sol.charges[ki].push_back(
          killing_charge(m, m.killing_fields()[ki], GeodesicState{x, v}));
    }
  }

  if (sol.termination == Termination::BlowUp ||
      sol.termination == Termination::StepUnderflow) {
    auto [b, conf] = estimate_max_parameter(m, sol);
    sol.b_hat = b;
    sol.confidence = conf;
  }
  if (m.has_quotient()) sol.winding = winding_of(sol, m);
  return sol;
}

std::pair<double, double> estimate_max_parameter(const SpacetimeModel& m,
                                                 const GeodesicSolution& sol,
                                                 int window) {
  if (sol.termination == Termination::ReachedSpan) {
    throw IntegratorError(
        "maximal-parameter estimate requires a truncated solution");
  }
  const int total = static_cast<int>(sol.size());
  const int count = std::min(window, total);
  if (count < 3) {
    throw IntegratorError("too few samples to extrapolate");
  }
  // Fit 1/|gamma'|_R = a + b s; root at -a/b.
  Eigen::MatrixXd A(count, 2);
  Eigen::VectorXd rhs(count);
  for (int i = 0; i < count; ++i) {
    const int idx = total - count + i;
    A(i, 0) = 1.0;
    A(i, 1) = sol.s[idx];
    rhs[i] = 1.0 / riemannian_norm(
                       m, TangentVector{ChartPoint{sol.points[idx], m.id()},
                                        sol.velocities[idx]});
  }
  Eigen::Vector2d coef = A.colPivHouseholderQr().solve(rhs);
  const double resid = (A * coef - rhs).norm() / std::sqrt(double(count));
  if (coef[1] == 0.0) {
    return {std::numeric_limits<double>::infinity(), resid};
  }
  return {-coef[0] / coef[1], resid};
}

std::vector<long> winding_of(const GeodesicSolution& sol,
                             const SpacetimeModel& m) {
  if (!m.has_quotient()) {
    throw IntegratorError("model has no quotient structure");
  }
  if (sol.size() < 2) return std::vector<long>(m.periods().size(), 0);
  const int n = m.dimension();
  const int np = static_cast<int>(m.periods().size());
  Mat P(n, np);
  for (int j = 0; j < np; ++j) P.col(j) = m.periods()[j];
  const Vec d = sol.points.back() - sol.points.front();
  const Vec k = (P.transpose() * P).ldlt().solve(P.transpose() * d);
  std::vector<long> out(np);
  for (int j = 0; j < np; ++j) out[j] = std::lround(k[j]);
  return out;
}

Vec sample_dense_segments(const std::vector<DenseSegment>& dense, double s) {
  if (dense.empty()) {
    throw IntegratorError("solution has no dense output");
  }
  const bool fwd = dense.front().s1 >= dense.front().s0;
  int lo = 0, hi = static_cast<int>(dense.size()) - 1;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    const bool before = fwd ? (s > dense[mid].s1) : (s < dense[mid].s1);
    if (before)
      lo = mid + 1;
    else
      hi = mid;
  }
  const DenseSegment& seg = dense[lo];
  const double h = seg.s1 - seg.s0;
  const double u = (s - seg.s0) / h;
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
  return h00 * seg.y0 + h10 * h * seg.f0 + h01 * seg.y1 + h11 * h * seg.f1;
}

GeodesicState sample_dense(const GeodesicSolution& sol, double s) {
  const Vec y = sample_dense_segments(sol.dense, s);
  const int n = static_cast<int>(y.size()) / 2;
  return GeodesicState{y.head(n), y.tail(n)};
}

ReparamResult lightlike_reparam(const SpacetimeModel& m,
                                const GeodesicSolution& sol, const Expr& omega,
                                double C) {
  if (C <= 0.0) throw IntegratorError("reparametrization scale must be > 0");
  const int n = m.dimension();
  for (std::size_t i = 0; i < sol.size(); ++i) {
    const auto cc = causal_character(
        m, TangentVector{ChartPoint{sol.points[i], m.id()}, sol.velocities[i]},
        1e-6);
    if (cc != CausalCharacter::Lightlike) {
      throw IntegratorError("input geodesic is not lightlike at sample " +
                            std::to_string(i));
    }
  }
  std::vector<Expr> domega;
  for (const auto& cname : m.coords()) domega.push_back(omega.diff(cname));

  auto omega_at = [&](const Vec& x) { return omega.eval(m.bind(x)); };

  ReparamResult out;
  out.sol.model_id = "conformal(" + m.id() + ")";
  out.sol.termination = sol.termination;
  out.sol.b_hat = sol.b_hat;
  out.sol.confidence = sol.confidence;
  out.sol.winding = sol.winding;
  if (sol.dense.empty()) {
    throw IntegratorError("reparametrization needs dense output");
  }
  // sigma(t) by Simpson quadrature of C * omega over each accepted step.
  double sigma = 0.0;
  auto push = [&](double sg, const Vec& x, const Vec& v) {
    out.sol.s.push_back(sg);
    out.sol.points.push_back(x);
    out.sol.velocities.push_back(v / (C * omega_at(x)));
    out.sol.g_vv.push_back(0.0);
  };
  push(sigma, sol.points.front(), sol.velocities.front());
  for (const auto& seg : sol.dense) {
    const double h = seg.s1 - seg.s0;
    const GeodesicState mid = sample_dense(sol, seg.s0 + 0.5 * h);
    const double om0 = omega_at(seg.y0.head(n));
    const double omm = omega_at(mid.position);
    const double om1 = omega_at(seg.y1.head(n));
    sigma += C * h / 6.0 * (om0 + 4.0 * omm + om1);
    push(sigma, seg.y1.head(n), seg.y1.tail(n));
  }

  // Residual of the transformed geodesic equation from analytic pieces:
  // w = v/(C om), dw/dsigma = (dv/dt - v dln(om)/dt) / (C om)^2.
  const SpacetimeModel mstar = [&] {
    const auto& ge = m.metric_exprs();
    std::vector<std::vector<Expr>> g(n, std::vector<Expr>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g[i][j] = omega * ge[i][j];
    return SpacetimeModel::analytic(out.sol.model_id, m.coords(), m.index(),
                                    g);
  }();
  double max_res = 0.0;
  for (std::size_t i = 0; i < sol.size(); ++i) {
    const Vec& x = sol.points[i];
    const Vec& v = sol.velocities[i];
    const double om = omega_at(x);
    const Bindings b = m.bind(x);
    double dom_dt = 0.0;
    for (int j = 0; j < n; ++j) dom_dt += domega[j].eval(b) * v[j];
    const GeodesicState acc = geodesic_rhs(m, GeodesicState{x, v});
    const Vec dw_dsigma =
        (acc.velocity - (dom_dt / om) * v) / (C * C * om * om);
    const Vec w = v / (C * om);
    const auto gamma_star = christoffel_at(mstar, ChartPoint{x, ""});
    Vec res = dw_dsigma;
    for (int kk = 0; kk < n; ++kk) res[kk] += w.dot(gamma_star[kk] * w);
    max_res = std::max(max_res, res.norm());
  }
  out.max_residual = max_res;
  return out;
}

std::string trajectory_csv(const SpacetimeModel& m,
                           const GeodesicSolution& sol) {
  std::string csv = "s";
  for (int i = 1; i <= m.dimension(); ++i) csv += ", x" + std::to_string(i);
  for (int i = 1; i <= m.dimension(); ++i) csv += ", v" + std::to_string(i);
  csv += ", g_vv";
  for (std::size_t i = 1; i <= sol.killing_names.size(); ++i) {
    csv += ", K" + std::to_string(i);
  }
  csv += "\n";
  for (std::size_t r = 0; r < sol.size(); ++r) {
    csv += fmt17(sol.s[r]);
    for (int i = 0; i < m.dimension(); ++i) {
      csv += ", " + fmt17(sol.points[r][i]);
    }
    for (int i = 0; i < m.dimension(); ++i) {
      csv += ", " + fmt17(sol.velocities[r][i]);
    }
    csv += ", " + fmt17(sol.g_vv[r]);
    for (const auto& charge : sol.charges) csv += ", " + fmt17(charge[r]);
    csv += "\n";
  }
  return csv;
}

std::string summary_json(const GeodesicSolution& sol) {
  nlohmann::json j;
  j["schema"] = "lgeo-trajectory-summary-1";
  j["termination"] = to_string(sol.termination);
  if (std::isfinite(sol.b_hat)) {
    j["b_hat"] = sol.b_hat;
    j["confidence"] = sol.confidence;
  } else {
    j["b_hat"] = nullptr;
    j["confidence"] = nullptr;
  }
  j["winding"] = sol.winding;
  j["samples"] = sol.size();
  return j.dump(2);
}

}  // namespace lgeo
