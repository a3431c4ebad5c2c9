#include "lgeo/variational.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace lgeo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int spatial_dim(const StationarySpec& spec) { return spec.spatial.dimension(); }

void check_event(const Vec& p, int ns, const char* what) {
  if (p.size() != ns + 1)
    throw VariationalError(std::string(what) +
                           " must be a full event (t, x...) of dimension " +
                           std::to_string(ns + 1));
}

// Cached symbolic derivatives of beta and delta for the reduced equation.
struct StationaryEval {
  const StationarySpec* spec;
  int ns;
  std::vector<Expr> dbeta;                 // d beta / d x^j
  std::vector<std::vector<Expr>> ddelta;   // [l][j] = d delta^l / d x^j

  explicit StationaryEval(const StationarySpec& s)
      : spec(&s), ns(s.spatial.dimension()) {
    const auto& names = s.spatial.coords();
    for (int j = 0; j < ns; ++j) dbeta.push_back(s.beta.diff(names[j]));
    if (!s.delta.empty() && static_cast<int>(s.delta.size()) != ns)
      throw VariationalError("delta must have one component per coordinate");
    for (const auto& comp : s.delta) {
      std::vector<Expr> row;
      for (int j = 0; j < ns; ++j) row.push_back(comp.diff(names[j]));
      ddelta.push_back(std::move(row));
    }
  }

  // Reduced spatial acceleration x'' at charge C; optionally reports t'.
  Vec accel(double C, const Vec& x, const Vec& xp, double* tprime) const {
    const SpacetimeModel& M0 = spec->spatial;
    Bindings b = M0.bind(x);
    Mat g = M0.metric_raw(x);
    Mat ginv = g.inverse();
    std::vector<Mat> gamma = christoffel_at(M0, ChartPoint{x, M0.id()});

    double beta = spec->beta.eval(b);
    if (!(beta > 0.0)) throw VariationalError("beta must stay positive");
    Vec db(ns);
    for (int j = 0; j < ns; ++j) db(j) = dbeta[j].eval(b);

    Vec delta = Vec::Zero(ns);
    for (std::size_t l = 0; l < spec->delta.size(); ++l)
      delta(static_cast<int>(l)) = spec->delta[l].eval(b);

    double A = delta.dot(g * xp);  // <delta, x'>_R
    double tp = (A - C) / beta;
    if (tprime) *tprime = tp;

    Vec gamma_v(ns);
    for (int k = 0; k < ns; ++k) gamma_v(k) = xp.dot(gamma[k] * xp);

    if (spec->delta.empty() && std::all_of(db.begin(), db.end(), [](double d) {
          return d == 0.0;
        }))
      return -gamma_v;

    // B_jk = g_kl (d_j delta^l + Gamma^l_jm delta^m).
    Mat B = Mat::Zero(ns, ns);
    if (!spec->delta.empty()) {
      Mat dd(ns, ns);  // dd(j, l) = d_j delta^l + Gamma^l_jm delta^m
      for (int j = 0; j < ns; ++j)
        for (int l = 0; l < ns; ++l) {
          double v = ddelta[l][j].eval(b);
          for (int mm = 0; mm < ns; ++mm) v += gamma[l](j, mm) * delta(mm);
          dd(j, l) = v;
        }
      B = dd * g;  // B(j, k) = dd(j, l) g(l, k)
    }
    Mat rot = B - B.transpose();

    double lam = -1.0 / (beta + delta.dot(g * delta));
    Vec grad_beta = ginv * db;

    Vec R0 = -0.5 * (lam * delta.dot(db) * delta + grad_beta);
    Vec R1 = -lam * (db.dot(xp) + xp.dot(rot * delta)) * delta +
             ginv * (rot * xp);
    Vec R2 = lam * xp.dot((B + B.transpose()) * xp) * delta;

    return -gamma_v + tp * tp * R0 + tp * R1 + R2;
  }
};

// Cubic Hermite value and derivative of the full state inside a segment.
Vec hermite_state(const DenseSegment& seg, double s, Vec* deriv) {
  double h = seg.s1 - seg.s0;
  double th = (s - seg.s0) / h;
  Vec d = seg.y1 - seg.y0;
  Vec a = seg.f0 * h - d;
  Vec bb = -seg.f1 * h + d;
  Vec y = (1.0 - th) * seg.y0 + th * seg.y1 +
          th * (1.0 - th) * ((1.0 - th) * a + th * bb);
  if (deriv) {
    Vec dth = d + (1.0 - 2.0 * th) * ((1.0 - th) * a + th * bb) +
              th * (1.0 - th) * (bb - a);
    *deriv = dth / h;
  }
  return y;
}

const DenseSegment* find_segment(const std::vector<DenseSegment>& dense,
                                 double s) {
  if (dense.empty()) return nullptr;
  std::size_t lo = 0, hi = dense.size() - 1;
  bool fwd = dense.back().s1 >= dense.front().s0;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    bool before = fwd ? (s > dense[mid].s1) : (s < dense[mid].s1);
    if (before)
      lo = mid + 1;
    else
      hi = mid;
  }
  return &dense[lo];
}

// Objective with inf-on-failure semantics for line searches.
using Objective = std::function<double(const Vec&, Vec*)>;

struct LbfgsOutcome {
  Vec u;
  double f = kInf;
  double grad_norm = kInf;
  int iters = 0;
  bool converged = false;
  bool decreasing_at_exit = false;
  bool bound_hit = false;
};

LbfgsOutcome lbfgs_minimize(const Objective& fn, Vec u0, double grad_tol,
                            int max_iters, double bound) {
  const int mem = 10;
  LbfgsOutcome out;
  out.u = std::move(u0);
  Vec g(out.u.size());
  out.f = fn(out.u, &g);
  if (!std::isfinite(out.f))
    throw VariationalError("objective not finite at the initial path");
  out.grad_norm = g.norm();

  std::vector<Vec> s_hist, y_hist;
  std::vector<double> rho_hist, f_hist;
  f_hist.push_back(out.f);

  for (int it = 0; it < max_iters; ++it) {
    out.iters = it;
    if (out.grad_norm <= grad_tol) {
      out.converged = true;
      break;
    }
    if (out.u.lpNorm<Eigen::Infinity>() > bound) {
      out.bound_hit = true;
      break;
    }

    // Two-loop recursion.
    Vec q = g;
    int k = static_cast<int>(s_hist.size());
    std::vector<double> alpha(k);
    for (int i = k - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (k > 0) {
      double gamma = s_hist.back().dot(y_hist.back()) /
                     y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (int i = 0; i < k; ++i) {
      double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Vec dir = -q;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      dir = -g;
      slope = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    double step = (k == 0) ? std::min(1.0, 1.0 / std::max(1.0, g.norm())) : 1.0;
    Vec g_new(g.size());
    double f_new = kInf;
    bool ls_ok = false;
    for (int ls = 0; ls < 40; ++ls) {
      Vec trial = out.u + step * dir;
      f_new = fn(trial, &g_new);
      if (std::isfinite(f_new) && f_new <= out.f + 1e-4 * step * slope) {
        Vec s_vec = step * dir;
        Vec y_vec = g_new - g;
        double sy = s_vec.dot(y_vec);
        if (sy > 1e-12 * s_vec.norm() * y_vec.norm()) {
          s_hist.push_back(s_vec);
          y_hist.push_back(y_vec);
          rho_hist.push_back(1.0 / sy);
          if (static_cast<int>(s_hist.size()) > mem) {
            s_hist.erase(s_hist.begin());
            y_hist.erase(y_hist.begin());
            rho_hist.erase(rho_hist.begin());
          }
        }
        out.u = trial;
        out.f = f_new;
        g = g_new;
        out.grad_norm = g.norm();
        ls_ok = true;
        break;
      }
      step *= 0.5;
    }
    f_hist.push_back(out.f);
    if (!ls_ok) break;  // stalled line search
  }
  if (out.grad_norm <= grad_tol) out.converged = true;

  int window = std::min<int>(50, static_cast<int>(f_hist.size()) - 1);
  if (window > 0) {
    double before = f_hist[f_hist.size() - 1 - window];
    out.decreasing_at_exit =
        out.f < before - 1e-10 * (1.0 + std::abs(before));
  }
  return out;
}

double mean_action(const GeodesicSolution& sol) {
  if (sol.g_vv.empty()) return 0.0;
  // Trapezoid over the sample parameters, normalized by the span.
  if (sol.size() < 2) return sol.g_vv.front();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < sol.size(); ++i)
    acc += 0.5 * (sol.g_vv[i] + sol.g_vv[i + 1]) * (sol.s[i + 1] - sol.s[i]);
  double span = sol.s.back() - sol.s.front();
  return span != 0.0 ? acc / span : sol.g_vv.front();
}

double range_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

void fill_record_from_trajectory(GeodesicRecord& rec,
                                 const SpacetimeModel& full) {
  rec.action = mean_action(rec.trajectory);
  rec.q = rec.action;
  rec.drift_q = range_of(rec.trajectory.g_vv);
  if (!rec.trajectory.charges.empty() &&
      !rec.trajectory.charges[0].empty()) {
    rec.C_gamma = rec.trajectory.charges[0][0];
    rec.drift_C = range_of(rec.trajectory.charges[0]);
  }
  rec.residual = geodesic_residual(full, rec.trajectory);
}

int thread_budget() {
  if (const char* env = std::getenv("LORENTZ_GEODESY_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

// One static-reduction minimization toward a (possibly lifted) endpoint.
struct StaticCoreResult {
  ConnectStatus status = ConnectStatus::NotFound;
  std::string diagnostic;
  std::optional<GeodesicRecord> record;
};

StaticCoreResult connect_static_core(const StationarySpec& spec,
                                     const SpacetimeModel& full, double t_p,
                                     const Vec& x_p, double t_q,
                                     const Vec& x_q,
                                     const ConnectOptions& opts) {
  StaticCoreResult out;
  int ns = spatial_dim(spec);
  PathDiscretization path = straight_path(t_p, x_p, t_q, x_q, opts.N);
  int nfree = (opts.N - 1) * ns;

  auto pack = [&](const PathDiscretization& pth) {
    Vec u(nfree);
    for (int i = 0; i < opts.N - 1; ++i) u.segment(i * ns, ns) = pth.x[i];
    return u;
  };
  auto unpack = [&](const Vec& u, PathDiscretization& pth) {
    for (int i = 0; i < opts.N - 1; ++i) pth.x[i] = u.segment(i * ns, ns);
  };

  Objective fn = [&](const Vec& u, Vec* grad) -> double {
    PathDiscretization trial = path;
    unpack(u, trial);
    try {
      return static_J_value(spec, trial, grad);
    } catch (const std::exception&) {
      return kInf;
    }
  };

  double bound =
      std::max(opts.node_bound,
               1e3 * (1.0 + x_p.lpNorm<Eigen::Infinity>() +
                      x_q.lpNorm<Eigen::Infinity>()));
  LbfgsOutcome opt = lbfgs_minimize(fn, pack(path), opts.grad_tol_scale * opts.N,
                                    opts.max_iters, bound);
  unpack(opt.u, path);

  if (!opt.converged) {
    if (opt.bound_hit || opt.decreasing_at_exit) {
      out.status = ConnectStatus::NotFound;
      out.diagnostic =
          "minimizing sequence escapes: the action kept decreasing without a "
          "critical point (grad norm " +
          std::to_string(opt.grad_norm) + " after " +
          std::to_string(opt.iters) + " iterations)";
    } else {
      out.status = ConnectStatus::MaxIterations;
      out.diagnostic = "iteration budget exhausted before convergence";
    }
    return out;
  }

  // Reconstruct time, lift to the full spacetime, refine by shooting.
  std::vector<double> tn = reconstruct_time_static(spec, path);
  Vec p_full(ns + 1), q_full(ns + 1);
  p_full(0) = t_p;
  p_full.tail(ns) = x_p;
  q_full(0) = t_q;
  q_full.tail(ns) = x_q;
  double h = 1.0 / opts.N;
  Vec first = path.node(1);
  Vec v0(ns + 1);
  v0(0) = (tn[1] - tn[0]) / h;
  v0.tail(ns) = (first - x_p) / h;

  ShootResult shot = shoot_geodesic(full, p_full, q_full, v0);
  if (!shot.converged) {
    out.status = ConnectStatus::NotFound;
    out.diagnostic =
        "discrete minimizer found but shooting refinement did not converge "
        "(endpoint error " +
        std::to_string(shot.endpoint_error) + ")";
    return out;
  }

  GeodesicRecord rec;
  rec.trajectory = std::move(shot.sol);
  rec.endpoint_error = shot.endpoint_error;
  rec.grad_norm_exit = opt.grad_norm;
  fill_record_from_trajectory(rec, full);
  out.status = ConnectStatus::Found;
  out.record = std::move(rec);
  return out;
}

}  // namespace

Vec PathDiscretization::node(int i) const {
  int N = segments();
  if (i <= 0) return x_p;
  if (i >= N) return x_q;
  return x[i - 1];
}

PathDiscretization straight_path(double t_p, const Vec& x_p, double t_q,
                                 const Vec& x_q, int N) {
  if (N < 2) throw VariationalError("need at least 2 segments");
  if (x_p.size() != x_q.size())
    throw VariationalError("endpoint dimension mismatch");
  PathDiscretization path;
  path.t_p = t_p;
  path.t_q = t_q;
  path.x_p = x_p;
  path.x_q = x_q;
  path.x.reserve(N - 1);
  for (int i = 1; i < N; ++i) {
    double s = static_cast<double>(i) / N;
    path.x.push_back((1.0 - s) * x_p + s * x_q);
  }
  return path;
}

double action_value(const SpacetimeModel& m, const std::vector<Vec>& nodes) {
  if (nodes.size() < 2) throw VariationalError("need at least 2 nodes");
  int N = static_cast<int>(nodes.size()) - 1;
  double h = 1.0 / N;
  double acc = 0.0;
  for (int i = 0; i < N; ++i) {
    Vec mid = 0.5 * (nodes[i] + nodes[i + 1]);
    Vec v = (nodes[i + 1] - nodes[i]) / h;
    acc += h * v.dot(m.metric_raw(mid) * v);
  }
  return acc;
}

Vec action_gradient(const SpacetimeModel& m, const std::vector<Vec>& nodes) {
  int N = static_cast<int>(nodes.size()) - 1;
  int n = m.dimension();
  double h = 1.0 / N;
  Vec grad = Vec::Zero((N - 1) * n);
  for (int i = 0; i < N; ++i) {
    Vec mid = 0.5 * (nodes[i] + nodes[i + 1]);
    Vec v = (nodes[i + 1] - nodes[i]) / h;
    Vec gv = m.metric_raw(mid) * v;
    Vec dquad(n);
    for (int c = 0; c < n; ++c) dquad(c) = v.dot(m.metric_derivative(mid, c) * v);
    // Left node i contributes -2 g v + (h/2) dquad; right node i+1 the +2.
    if (i > 0) grad.segment((i - 1) * n, n) += 0.5 * h * dquad - 2.0 * gv;
    if (i < N - 1) grad.segment(i * n, n) += 0.5 * h * dquad + 2.0 * gv;
  }
  return grad;
}

double static_J_value(const StationarySpec& spec,
                      const PathDiscretization& path, Vec* grad) {
  if (!spec.delta.empty())
    throw VariationalError("static reduction requires an empty delta");
  const SpacetimeModel& M0 = spec.spatial;
  int ns = M0.dimension();
  int N = path.segments();
  double h = 1.0 / N;
  double dt = path.t_q - path.t_p;

  std::vector<Expr> dbeta;
  if (grad)
    for (const auto& cn : M0.coords()) dbeta.push_back(spec.beta.diff(cn));

  double A = 0.0, B = 0.0;
  std::vector<double> beta_mid(N);
  if (grad) grad->setZero((N - 1) * ns);
  Vec dB = grad ? Vec::Zero((N - 1) * ns) : Vec();

  for (int i = 0; i < N; ++i) {
    Vec left = path.node(i), right = path.node(i + 1);
    Vec mid = 0.5 * (left + right);
    if (!M0.in_domain(mid))
      throw VariationalError("path midpoint left the spatial domain");
    Vec v = (right - left) / h;
    Mat g = M0.metric_raw(mid);
    A += h * v.dot(g * v);
    Bindings b = M0.bind(mid);
    double beta = spec.beta.eval(b);
    if (!(beta > 0.0)) throw VariationalError("beta must stay positive");
    beta_mid[i] = beta;
    B += h / beta;

    if (grad) {
      Vec gv = g * v;
      Vec dquad(ns), dbeta_mid(ns);
      for (int c = 0; c < ns; ++c) {
        dquad(c) = v.dot(M0.metric_derivative(mid, c) * v);
        dbeta_mid(c) = dbeta[c].eval(b);
      }
      Vec dBm = -(h / (beta * beta)) * dbeta_mid;  // d(h/beta)/d mid
      if (i > 0) {
        grad->segment((i - 1) * ns, ns) += 0.5 * h * dquad - 2.0 * gv;
        dB.segment((i - 1) * ns, ns) += 0.5 * dBm;
      }
      if (i < N - 1) {
        grad->segment(i * ns, ns) += 0.5 * h * dquad + 2.0 * gv;
        dB.segment(i * ns, ns) += 0.5 * dBm;
      }
    }
  }
  if (grad) *grad += (dt * dt / (B * B)) * dB;
  return A - dt * dt / B;
}

std::vector<double> reconstruct_time_static(const StationarySpec& spec,
                                            const PathDiscretization& path) {
  const SpacetimeModel& M0 = spec.spatial;
  int N = path.segments();
  double h = 1.0 / N;
  std::vector<double> inv_beta(N);
  double B = 0.0;
  for (int i = 0; i < N; ++i) {
    Vec mid = 0.5 * (path.node(i) + path.node(i + 1));
    inv_beta[i] = 1.0 / spec.beta.eval(M0.bind(mid));
    B += h * inv_beta[i];
  }
  double dt = path.t_q - path.t_p;
  std::vector<double> t(N + 1);
  t[0] = path.t_p;
  for (int i = 0; i < N; ++i) t[i + 1] = t[i] + (dt / B) * h * inv_beta[i];
  return t;
}

std::vector<double> reconstruct_time_stationary(const StationarySpec& spec,
                                                const PathDiscretization& path,
                                                double C, double t_p) {
  const SpacetimeModel& M0 = spec.spatial;
  int N = path.segments();
  double h = 1.0 / N;
  std::vector<double> t(N + 1);
  t[0] = t_p;
  for (int i = 0; i < N; ++i) {
    Vec mid = 0.5 * (path.node(i) + path.node(i + 1));
    Vec v = (path.node(i + 1) - path.node(i)) / h;
    Bindings b = M0.bind(mid);
    Mat g = M0.metric_raw(mid);
    Vec delta = Vec::Zero(M0.dimension());
    for (std::size_t l = 0; l < spec.delta.size(); ++l)
      delta(static_cast<int>(l)) = spec.delta[l].eval(b);
    double beta = spec.beta.eval(b);
    t[i + 1] = t[i] + h * (delta.dot(g * v) - C) / beta;
  }
  return t;
}

std::string to_string(ConnectStatus s) {
  switch (s) {
    case ConnectStatus::Found:
      return "Found";
    case ConnectStatus::NotFound:
      return "NotFound";
    case ConnectStatus::MaxIterations:
      return "MaxIterations";
  }
  return "?";
}

std::string connectedness_json(const ConnectednessResult& r) {
  nlohmann::ordered_json j;
  j["schema"] = "lgeo-connectedness-1";
  j["status"] = to_string(r.status);
  j["diagnostic"] = r.diagnostic;
  j["geodesics"] = nlohmann::ordered_json::array();
  for (const auto& rec : r.records) {
    nlohmann::ordered_json g;
    g["action"] = rec.action;
    g["grad_norm_exit"] = rec.grad_norm_exit;
    g["residual"] = rec.residual;
    g["endpoint_error"] = rec.endpoint_error;
    g["winding"] = rec.winding;
    g["C_gamma"] = rec.C_gamma;
    g["q"] = rec.q;
    g["drift_C"] = rec.drift_C;
    g["drift_q"] = rec.drift_q;
    g["samples"] = rec.trajectory.size();
    j["geodesics"].push_back(std::move(g));
  }
  return j.dump(2);
}

ConnectednessResult minimize_connect_static(const StationarySpec& spec,
                                            const Vec& p, const Vec& q,
                                            const ConnectOptions& opts) {
  int ns = spatial_dim(spec);
  check_event(p, ns, "p");
  check_event(q, ns, "q");
  SpacetimeModel full = static_spacetime(spec);
  StaticCoreResult core = connect_static_core(
      spec, full, p(0), p.tail(ns), q(0), q.tail(ns), opts);
  ConnectednessResult out;
  out.status = core.status;
  out.diagnostic = core.diagnostic;
  if (core.record) out.records.push_back(std::move(*core.record));
  if (out.status == ConnectStatus::Found && out.diagnostic.empty())
    out.diagnostic = "connecting geodesic found and verified";
  return out;
}

ConnectednessResult multistart_windings(const StationarySpec& spec,
                                        const Vec& p, const Vec& q, int K_max,
                                        const ConnectOptions& opts) {
  int ns = spatial_dim(spec);
  check_event(p, ns, "p");
  check_event(q, ns, "q");
  const auto& periods = spec.spatial.periods();
  if (periods.empty())
    throw VariationalError("winding multistart needs a quotient spatial model");
  if (periods.size() > 2)
    throw VariationalError("winding enumeration supports at most 2 periods");

  std::vector<std::vector<long>> labels;
  if (periods.size() == 1) {
    for (long k = -K_max; k <= K_max; ++k) labels.push_back({k});
  } else {
    for (long k1 = -K_max; k1 <= K_max; ++k1)
      for (long k2 = -K_max; k2 <= K_max; ++k2) labels.push_back({k1, k2});
  }

  SpacetimeModel full = static_spacetime(spec);
  std::vector<StaticCoreResult> results(labels.size());

  int threads = std::min<int>(thread_budget(), static_cast<int>(labels.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= labels.size()) return;
      Vec x_q = q.tail(ns).eval();
      for (std::size_t d = 0; d < periods.size(); ++d)
        x_q += static_cast<double>(labels[i][d]) * periods[d];
      try {
        results[i] =
            connect_static_core(spec, full, p(0), p.tail(ns), q(0), x_q, opts);
      } catch (const std::exception& e) {
        results[i].status = ConnectStatus::NotFound;
        results[i].diagnostic = e.what();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ConnectednessResult out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (results[i].status != ConnectStatus::Found) continue;
    GeodesicRecord rec = std::move(*results[i].record);
    rec.winding = labels[i];
    bool dup = false;
    for (const auto& prev : out.records) {
      double dv = (prev.trajectory.velocities.front() -
                   rec.trajectory.velocities.front())
                      .lpNorm<Eigen::Infinity>();
      if (std::abs(prev.action - rec.action) < 1e-6 && dv < 1e-4) {
        dup = true;
        break;
      }
    }
    if (!dup) out.records.push_back(std::move(rec));
  }
  std::sort(out.records.begin(), out.records.end(),
            [](const GeodesicRecord& a, const GeodesicRecord& b) {
              if (a.action != b.action) return a.action < b.action;
              return a.winding < b.winding;
            });
  out.status =
      out.records.empty() ? ConnectStatus::NotFound : ConnectStatus::Found;
  out.diagnostic = out.records.empty()
                       ? "no winding class produced a verified geodesic"
                       : std::to_string(out.records.size()) +
                             " distinct geodesics across winding classes";
  return out;
}

Vec stationary_reduced_rhs(const StationarySpec& spec, double C, const Vec& x,
                           const Vec& xp) {
  return StationaryEval(spec).accel(C, x, xp, nullptr);
}

OdeSolution stationary_reduced_integrate(const StationarySpec& spec, double C,
                                         double t0, const Vec& x0,
                                         const Vec& v0, double span,
                                         const OdeOptions& opts) {
  auto eval = std::make_shared<StationaryEval>(spec);
  int ns = eval->ns;
  if (x0.size() != ns || v0.size() != ns)
    throw VariationalError("state dimension mismatch");
  const SpacetimeModel& M0 = spec.spatial;
  OdeRhs rhs_c = [eval, ns, &M0, C](double, const Vec& y, Vec& dy) {
    Vec x = y.head(ns), xp = y.segment(ns, ns);
    if (!M0.in_domain(x)) return false;
    double tp = 0.0;
    Vec acc = eval->accel(C, x, xp, &tp);
    dy.resize(2 * ns + 1);
    dy.head(ns) = xp;
    dy.segment(ns, ns) = acc;
    dy(2 * ns) = tp;
    return true;
  };
  Vec y0(2 * ns + 1);
  y0.head(ns) = x0;
  y0.segment(ns, ns) = v0;
  y0(2 * ns) = t0;
  return integrate_ode(rhs_c, 0.0, span, y0, opts);
}

ConnectednessResult stationary_connect_shooting(const StationarySpec& spec,
                                                const Vec& p, const Vec& q,
                                                const ConnectOptions& opts) {
  int ns = spatial_dim(spec);
  check_event(p, ns, "p");
  check_event(q, ns, "q");
  Vec x_p = p.tail(ns), x_q = q.tail(ns);
  double t_p = p(0), t_q = q(0);
  SpacetimeModel full = stationary(spec);

  Bindings bp = spec.spatial.bind(x_p);
  Mat gp = spec.spatial.metric_raw(x_p);
  Vec delta_p = Vec::Zero(ns);
  for (std::size_t l = 0; l < spec.delta.size(); ++l)
    delta_p(static_cast<int>(l)) = spec.delta[l].eval(bp);
  double beta_p = spec.beta.eval(bp);

  OdeOptions iopts;
  iopts.rtol = 1e-11;
  iopts.atol = 1e-13;
  iopts.dense_output = false;

  auto endpoint = [&](const Vec& u) -> std::optional<Vec> {
    double C = u(0);
    Vec v0 = u.tail(ns);
    OdeSolution sol =
        stationary_reduced_integrate(spec, C, t_p, x_p, v0, 1.0, iopts);
    if (sol.termination != Termination::ReachedSpan) return std::nullopt;
    Vec F(ns + 1);
    F.head(ns) = sol.y.back().head(ns) - x_q;
    F(ns) = sol.y.back()(2 * ns) - t_q;
    return F;
  };

  auto solve_from = [&](Vec u) -> std::optional<Vec> {
    auto F0 = endpoint(u);
    if (!F0) return std::nullopt;
    Vec F = *F0;
    double tol = 1e-11 * (1.0 + q.lpNorm<Eigen::Infinity>());
    int newton_cap = std::min(opts.max_iters, 80);
    for (int it = 0; it < newton_cap; ++it) {
      if (F.lpNorm<Eigen::Infinity>() <= tol) return u;
      Mat J(ns + 1, ns + 1);
      bool ok = true;
      for (int j = 0; j <= ns; ++j) {
        double hj = 1e-7 * (1.0 + std::abs(u(j)));
        Vec up = u;
        up(j) += hj;
        auto Fp = endpoint(up);
        if (!Fp) {
          ok = false;
          break;
        }
        J.col(j) = (*Fp - F) / hj;
      }
      if (!ok) return std::nullopt;
      Vec du = J.colPivHouseholderQr().solve(-F);
      double alpha = 1.0;
      bool stepped = false;
      for (int ls = 0; ls < 12; ++ls) {
        auto Ft = endpoint(u + alpha * du);
        if (Ft && Ft->norm() < F.norm() * (1.0 - 1e-4 * alpha)) {
          u += alpha * du;
          F = *Ft;
          stepped = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!stepped) return std::nullopt;
    }
    auto Ff = endpoint(u);
    if (Ff && Ff->lpNorm<Eigen::Infinity>() <=
                  1e-11 * (1.0 + q.lpNorm<Eigen::Infinity>()))
      return u;
    return std::nullopt;
  };

  Vec v_init = x_q - x_p;
  double C_init = delta_p.dot(gp * v_init) - beta_p * (t_q - t_p);
  std::vector<Vec> starts;
  Vec u0(ns + 1);
  u0(0) = C_init;
  u0.tail(ns) = v_init;
  starts.push_back(u0);
  for (double sc : {0.5, 2.0, -1.0}) {
    Vec u = u0;
    u.tail(ns) *= sc;
    starts.push_back(u);
  }
  for (double dc : {1.0, -1.0}) {
    Vec u = u0;
    u(0) += dc * (1.0 + std::abs(C_init));
    starts.push_back(u);
  }

  ConnectednessResult out;
  for (const auto& s : starts) {
    auto u = solve_from(s);
    if (!u) continue;
    double C = (*u)(0);
    Vec v0 = u->tail(ns);
    double tp0 = (delta_p.dot(gp * v0) - C) / beta_p;
    Vec v_full(ns + 1);
    v_full(0) = tp0;
    v_full.tail(ns) = v0;
    GeodesicRecord rec;
    rec.trajectory = integrate_geodesic(full, p, v_full);
    if (rec.trajectory.termination != Termination::ReachedSpan) continue;
    rec.endpoint_error =
        (rec.trajectory.points.back() - q).lpNorm<Eigen::Infinity>();
    fill_record_from_trajectory(rec, full);
    out.records.push_back(std::move(rec));
    out.status = ConnectStatus::Found;
    out.diagnostic = "shooting on the reduced equation converged";
    return out;
  }
  out.status = ConnectStatus::NotFound;
  out.diagnostic = "shooting did not converge from any initializer";
  return out;
}

double stationary_J1_value(const StationarySpec& spec,
                           const PathDiscretization& path, double delta_t) {
  const SpacetimeModel& M0 = spec.spatial;
  int ns = M0.dimension();
  int N = path.segments();
  double h = 1.0 / N;
  double T1 = 0.0, T2 = 0.0, I1 = 0.0, I2 = 0.0;
  for (int i = 0; i < N; ++i) {
    Vec mid = 0.5 * (path.node(i) + path.node(i + 1));
    Vec v = (path.node(i + 1) - path.node(i)) / h;
    Bindings b = M0.bind(mid);
    Mat g = M0.metric_raw(mid);
    Vec delta = Vec::Zero(ns);
    for (std::size_t l = 0; l < spec.delta.size(); ++l)
      delta(static_cast<int>(l)) = spec.delta[l].eval(b);
    double beta = spec.beta.eval(b);
    double dv = delta.dot(g * v);
    T1 += h * v.dot(g * v);
    T2 += h * dv * dv / beta;
    I1 += h * dv / beta;
    I2 += h / beta;
  }
  return T1 + T2 - (I1 - delta_t) * (I1 - delta_t) / I2;
}

std::pair<double, double> penalty_psi(double eps, double s) {
  if (!(eps > 0.0)) throw VariationalError("penalty parameter must be positive");
  if (s < 0.0) throw VariationalError("penalty argument must be nonnegative");
  double d = s - 1.0 / eps;
  if (d <= 0.0) return {0.0, 0.0};
  double em1 = std::expm1(d);
  return {em1 - d - 0.5 * d * d, em1 - d};
}

double splitting_penalized_value(const SplittingSpec& spec,
                                 const PathDiscretization& path, double eps,
                                 Vec* grad) {
  int ns = spec.spatial_dim;
  SpacetimeModel full = splitting(spec);  // validates and fixes coordinates
  const auto& coords = full.coords();     // {"t", spatial...}
  int N = path.segments();
  int m = static_cast<int>(path.a.size());
  double h = 1.0 / N;
  double dt = path.t_q - path.t_p;
  const double pi = std::acos(-1.0);

  // Symbolic derivatives of alpha and beta in t and each spatial coordinate.
  std::vector<std::vector<std::vector<Expr>>> dalpha(ns + 1);
  std::vector<Expr> dbeta(ns + 1);
  if (grad) {
    for (int c = 0; c <= ns; ++c) {
      dbeta[c] = spec.beta.diff(coords[c]);
      dalpha[c].assign(ns, std::vector<Expr>(ns));
      for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j)
          dalpha[c][i][j] = spec.alpha[i][j].diff(coords[c]);
    }
  }

  double tnorm2 = dt * dt;
  for (int l = 1; l <= m; ++l)
    tnorm2 += 0.5 * path.a(l - 1) * path.a(l - 1) * (l * pi) * (l * pi);
  auto [psi, dpsi] = penalty_psi(eps, tnorm2);

  double value = -psi;
  if (grad) {
    grad->setZero(m + (N - 1) * ns);
    for (int l = 1; l <= m; ++l)
      (*grad)(l - 1) -= dpsi * (l * pi) * (l * pi) * path.a(l - 1);
  }

  for (int i = 0; i < N; ++i) {
    double smid = (i + 0.5) * h;
    Vec left = path.node(i), right = path.node(i + 1);
    Vec xmid = 0.5 * (left + right);
    Vec v = (right - left) / h;
    double tmid = path.t_p + smid * dt;
    double tpmid = dt;
    for (int l = 1; l <= m; ++l) {
      tmid += path.a(l - 1) * std::sin(l * pi * smid);
      tpmid += path.a(l - 1) * (l * pi) * std::cos(l * pi * smid);
    }

    Bindings b;
    b[coords[0]] = tmid;
    for (int c = 0; c < ns; ++c) b[coords[c + 1]] = xmid(c);

    Mat alpha(ns, ns);
    for (int r = 0; r < ns; ++r)
      for (int c = 0; c < ns; ++c) alpha(r, c) = spec.alpha[r][c].eval(b);
    double beta = spec.beta.eval(b);
    value += h * (v.dot(alpha * v) - beta * tpmid * tpmid);

    if (grad) {
      // Time coefficients: chain rule through t(s), t'(s).
      Mat dat(ns, ns);
      for (int r = 0; r < ns; ++r)
        for (int c = 0; c < ns; ++c) dat(r, c) = dalpha[0][r][c].eval(b);
      double dbt = dbeta[0].eval(b);
      double dvalue_dt = v.dot(dat * v) - dbt * tpmid * tpmid;
      for (int l = 1; l <= m; ++l) {
        double sl = std::sin(l * pi * smid);
        double cl = (l * pi) * std::cos(l * pi * smid);
        (*grad)(l - 1) += h * (dvalue_dt * sl - 2.0 * beta * tpmid * cl);
      }
      // Spatial nodes.
      Vec av = alpha * v;
      Vec dquad(ns);
      for (int c = 0; c < ns; ++c) {
        Mat dac(ns, ns);
        for (int r = 0; r < ns; ++r)
          for (int cc = 0; cc < ns; ++cc) dac(r, cc) = dalpha[c + 1][r][cc].eval(b);
        dquad(c) = v.dot(dac * v) - dbeta[c + 1].eval(b) * tpmid * tpmid;
      }
      if (i > 0)
        grad->segment(m + (i - 1) * ns, ns) += 0.5 * h * dquad - 2.0 * av;
      if (i < N - 1) grad->segment(m + i * ns, ns) += 0.5 * h * dquad + 2.0 * av;
    }
  }
  return value;
}

ConnectednessResult solve_splitting_saddle(const SplittingSpec& spec,
                                           const Vec& p, const Vec& q,
                                           const ConnectOptions& opts) {
  int ns = spec.spatial_dim;
  check_event(p, ns, "p");
  check_event(q, ns, "q");
  double t_p = p(0), t_q = q(0), dt = t_q - t_p;
  SpacetimeModel full = splitting(spec);

  double eps = opts.epsilon > 0.0 ? opts.epsilon : 1.0 / (4.0 * (dt * dt + 1.0));

  ConnectednessResult out;
  int m = opts.m_modes;
  PathDiscretization path = straight_path(t_p, p.tail(ns), t_q, q.tail(ns),
                                          opts.N);
  path.a = Vec::Zero(m);
  double last_action = kInf;
  double grad_norm = kInf;
  std::optional<GeodesicRecord> best;

  for (int round = 0; round < 4; ++round) {
    int dim = m + (opts.N - 1) * ns;
    auto pack = [&]() {
      Vec u(dim);
      u.head(m) = path.a;
      for (int i = 0; i < opts.N - 1; ++i)
        u.segment(m + i * ns, ns) = path.x[i];
      return u;
    };
    auto unpack = [&](const Vec& u) {
      path.a = u.head(m);
      for (int i = 0; i < opts.N - 1; ++i)
        path.x[i] = u.segment(m + i * ns, ns);
    };

    auto residual = [&](const Vec& u) {
      PathDiscretization trial = path;
      trial.a = u.head(m);
      for (int i = 0; i < opts.N - 1; ++i)
        trial.x[i] = u.segment(m + i * ns, ns);
      Vec g;
      splitting_penalized_value(spec, trial, eps, &g);
      return g;
    };

    // Levenberg-Marquardt root-finding on the gradient of f_eps.
    Vec u = pack();
    Vec r = residual(u);
    double lambda = 1e-3;
    bool converged = false;
    for (int it = 0; it < opts.max_iters && it < 300; ++it) {
      if (r.lpNorm<Eigen::Infinity>() <= 1e-9) {
        converged = true;
        break;
      }
      Mat J(dim, dim);
      for (int j = 0; j < dim; ++j) {
        double hj = 1e-6 * (1.0 + std::abs(u(j)));
        Vec up = u, um = u;
        up(j) += hj;
        um(j) -= hj;
        J.col(j) = (residual(up) - residual(um)) / (2.0 * hj);
      }
      Mat JtJ = J.transpose() * J;
      Vec Jtr = J.transpose() * r;
      bool stepped = false;
      for (int tr = 0; tr < 12; ++tr) {
        Mat A = JtJ + lambda * Mat::Identity(dim, dim);
        Vec du = A.ldlt().solve(-Jtr);
        Vec rt = residual(u + du);
        if (rt.norm() < r.norm()) {
          u += du;
          r = rt;
          lambda = std::max(lambda * 0.3, 1e-12);
          stepped = true;
          break;
        }
        lambda *= 10.0;
      }
      if (!stepped) break;
    }
    unpack(u);
    grad_norm = r.lpNorm<Eigen::Infinity>();
    if (!converged) {
      out.status = ConnectStatus::MaxIterations;
      out.diagnostic = "saddle search stalled (gradient sup norm " +
                       std::to_string(grad_norm) + ")";
      return out;
    }

    // Penalty must be inert at the critical point.
    const double pi = std::acos(-1.0);
    double tnorm2 = dt * dt;
    for (int l = 1; l <= m; ++l)
      tnorm2 += 0.5 * path.a(l - 1) * path.a(l - 1) * (l * pi) * (l * pi);
    if (tnorm2 > 1.0 / eps) {
      eps *= 0.25;
      continue;
    }

    // Assemble, refine by shooting, and check Galerkin saturation.
    double tp0 = dt;
    for (int l = 1; l <= m; ++l) tp0 += path.a(l - 1) * (l * pi);
    Vec v0(ns + 1);
    v0(0) = tp0;
    v0.tail(ns) = (path.node(1) - path.x_p) * opts.N;
    ShootResult shot = shoot_geodesic(full, p, q, v0);
    if (!shot.converged) {
      out.status = ConnectStatus::NotFound;
      out.diagnostic = "saddle found but shooting refinement did not converge";
      return out;
    }
    GeodesicRecord rec;
    rec.trajectory = std::move(shot.sol);
    rec.endpoint_error = shot.endpoint_error;
    rec.grad_norm_exit = grad_norm;
    fill_record_from_trajectory(rec, full);
    double action = rec.action;
    best = std::move(rec);
    if (std::abs(action - last_action) < 1e-6 || m >= 4 * opts.m_modes) break;
    last_action = action;
    Vec a_old = path.a;
    m *= 2;
    path.a = Vec::Zero(m);
    path.a.head(a_old.size()) = a_old;
  }

  if (!best) {
    out.status = ConnectStatus::NotFound;
    out.diagnostic = "penalty never became inert; epsilon reduction exhausted";
    return out;
  }
  out.status = ConnectStatus::Found;
  out.diagnostic = "penalized saddle verified as a geodesic";
  out.records.push_back(std::move(*best));
  return out;
}

GrowthDiagnostic growth_check(const StationarySpec& spec, double box_radius) {
  const SpacetimeModel& M0 = spec.spatial;
  int ns = M0.dimension();
  std::vector<double> radii;
  for (double r = 1.0; r <= box_radius * (1.0 + 1e-12); r *= 2.0)
    radii.push_back(r);
  if (radii.size() < 3) throw VariationalError("box radius too small");

  std::mt19937_64 rng(5150);
  std::normal_distribution<double> gauss;
  std::vector<Vec> dirs;
  if (ns == 1) {
    dirs.push_back(Vec::Constant(1, 1.0));
    dirs.push_back(Vec::Constant(1, -1.0));
  } else {
    for (int i = 0; i < 64; ++i) {
      Vec d(ns);
      for (int c = 0; c < ns; ++c) d(c) = gauss(rng);
      if (d.norm() < 1e-12) d(0) = 1.0;
      dirs.push_back(d / d.norm());
    }
  }

  std::vector<double> beta_max(radii.size(), 0.0), delta_max(radii.size(), 0.0);
  for (std::size_t j = 0; j < radii.size(); ++j) {
    for (const auto& d : dirs) {
      Vec x = radii[j] * d;
      if (!M0.in_domain(x)) continue;
      Bindings b = M0.bind(x);
      beta_max[j] = std::max(beta_max[j], spec.beta.eval(b));
      if (!spec.delta.empty()) {
        Mat g = M0.metric_raw(x);
        Vec delta(ns);
        for (int l = 0; l < ns; ++l) delta(l) = spec.delta[l].eval(b);
        delta_max[j] = std::max(delta_max[j], std::sqrt(delta.dot(g * delta)));
      }
    }
  }

  auto fit_exponent = [&](const std::vector<double>& vals) {
    // Slope of log val against log r over the outer half of the radii.
    std::size_t lo = radii.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t j = lo; j < radii.size(); ++j) {
      if (!(vals[j] > 0.0)) continue;
      double X = std::log(radii[j]), Y = std::log(vals[j]);
      sx += X;
      sy += Y;
      sxx += X * X;
      sxy += X * Y;
      ++n;
    }
    if (n < 2) return 0.0;
    double denom = n * sxx - sx * sx;
    return denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  };

  GrowthDiagnostic out;
  out.beta_exponent = fit_exponent(beta_max);
  out.beta_coefficient =
      beta_max.back() / std::pow(radii.back(), out.beta_exponent);
  out.beta_at_most_quadratic = out.beta_exponent <= 2.1;
  if (!spec.delta.empty()) {
    out.delta_exponent = fit_exponent(delta_max);
    out.delta_slope = delta_max.back() / radii.back();
    out.delta_at_most_linear = out.delta_exponent <= 1.1;
  } else {
    out.delta_at_most_linear = true;
  }
  return out;
}

ShootResult shoot_geodesic(const SpacetimeModel& m, const Vec& p, const Vec& q,
                           const Vec& v_guess, int max_iters) {
  int n = m.dimension();
  if (p.size() != n || q.size() != n || v_guess.size() != n)
    throw VariationalError("shooting endpoints must match the model dimension");

  IntegratorOptions iopts;
  iopts.rtol = 1e-12;
  iopts.atol = 1e-13;

  auto run = [&](const Vec& v) -> std::optional<GeodesicSolution> {
    try {
      GeodesicSolution sol = integrate_geodesic(m, p, v, iopts);
      if (sol.termination != Termination::ReachedSpan) return std::nullopt;
      return sol;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };

  ShootResult out;
  Vec v = v_guess;
  auto sol = run(v);
  if (!sol) return out;
  Vec F = sol->points.back() - q;
  out.sol = std::move(*sol);
  out.endpoint_error = F.lpNorm<Eigen::Infinity>();
  double tol = 1e-11 * (1.0 + q.lpNorm<Eigen::Infinity>());

  for (int it = 0; it < max_iters; ++it) {
    if (out.endpoint_error <= tol) {
      out.converged = true;
      return out;
    }
    Mat J(n, n);
    bool ok = true;
    for (int j = 0; j < n; ++j) {
      double hj = 1e-7 * (1.0 + std::abs(v(j)));
      Vec vp = v;
      vp(j) += hj;
      auto sp = run(vp);
      if (!sp) {
        ok = false;
        break;
      }
      J.col(j) = (sp->points.back() - q - F) / hj;
    }
    if (!ok) break;
    Vec dv = J.colPivHouseholderQr().solve(-F);
    double alpha = 1.0;
    bool stepped = false;
    for (int ls = 0; ls < 12; ++ls) {
      auto st = run(v + alpha * dv);
      if (st) {
        Vec Ft = st->points.back() - q;
        if (Ft.norm() < F.norm() * (1.0 - 1e-4 * alpha) || Ft.norm() < tol) {
          v += alpha * dv;
          F = Ft;
          out.sol = std::move(*st);
          out.endpoint_error = F.lpNorm<Eigen::Infinity>();
          stepped = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!stepped) break;
  }
  out.converged = out.endpoint_error <= tol;
  return out;
}

double geodesic_residual(const SpacetimeModel& m, const GeodesicSolution& sol,
                         int probes) {
  if (sol.dense.empty())
    throw VariationalError("geodesic residual needs dense output");
  int n = m.dimension();
  double s_begin = sol.dense.front().s0;
  double s_end = sol.dense.back().s1;
  double worst = 0.0;
  for (int j = 0; j < probes; ++j) {
    double s = s_begin + (j + 0.5) * (s_end - s_begin) / probes;
    const DenseSegment* seg = find_segment(sol.dense, s);
    Vec deriv;
    Vec y = hermite_state(*seg, s, &deriv);
    Vec x = y.head(n), v = y.segment(n, n);
    Vec vdot = deriv.segment(n, n);
    std::vector<Mat> gamma = christoffel_at(m, ChartPoint{x, m.id()});
    for (int k = 0; k < n; ++k)
      worst = std::max(worst, std::abs(vdot(k) + v.dot(gamma[k] * v)));
  }
  return worst;
}

}  // namespace lgeo
