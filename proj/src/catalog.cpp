#include "lgeo/catalog.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace lgeo {
namespace {

Expr c(double v) { return Expr::constant(v); }
Expr var(const std::string& n) { return Expr::variable(n); }

std::vector<std::string> default_coords(int n, int index) {
  static const char* lorentz4[] = {"t", "x", "y", "z"};
  static const char* riem4[] = {"x", "y", "z", "w"};
  std::vector<std::string> names;
  if (n <= 4) {
    const char** base = (index >= 1) ? lorentz4 : riem4;
    for (int i = 0; i < n; ++i) names.push_back(base[i]);
  } else {
    if (index >= 1) names.push_back("t");
    for (int i = static_cast<int>(names.size()); i < n; ++i) {
      names.push_back("x" + std::to_string(i));
    }
  }
  return names;
}

std::vector<std::vector<Expr>> const_diag(const std::vector<double>& d) {
  const int n = static_cast<int>(d.size());
  std::vector<std::vector<Expr>> g(n, std::vector<Expr>(n, c(0.0)));
  for (int i = 0; i < n; ++i) g[i][i] = c(d[i]);
  return g;
}

void require_vars_subset(const Expr& e, const std::vector<std::string>& allowed,
                         const std::string& what) {
  for (const auto& v : e.variables()) {
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      throw CatalogError(what + " uses unknown variable '" + v + "'");
    }
  }
}

// Random domain points for sampled validation; fixed seed keeps builds
// deterministic.
std::vector<Vec> sample_points(const SpacetimeModel& m, int count,
                               double radius = 3.0) {
  std::mt19937 rng(20240817u);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<Vec> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count && attempts < 100 * count) {
    ++attempts;
    Vec p(m.dimension());
    for (int i = 0; i < m.dimension(); ++i) p[i] = u(rng);
    if (m.in_domain(p)) out.push_back(p);
  }
  return out;
}

void validate_sampled(SpacetimeModel& m, int count = 64) {
  for (const Vec& p : sample_points(m, count)) {
    metric_at(m, ChartPoint{p, m.id()});  // throws on signature violation
  }
}

SpacetimeModel flat_model(const std::string& id, int n, int index) {
  std::vector<double> d(n, 1.0);
  for (int i = 0; i < index; ++i) d[i] = -1.0;
  return SpacetimeModel::analytic(id, default_coords(n, index), index,
                                  const_diag(d));
}

KillingCandidate coordinate_killing(const std::string& name, int n, int axis) {
  KillingCandidate k;
  k.name = name;
  k.components.assign(n, c(0.0));
  k.components[axis] = c(1.0);
  return k;
}

double eval_scalar(const std::string& text, const std::string& what) {
  try {
    return parse(text).eval({});
  } catch (const std::exception& e) {
    throw CatalogError("parameter '" + what + "': " + e.what());
  }
}

std::string param_or(const Params& p, const std::string& key,
                     const std::string& fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

std::string param_required(const Params& p, const std::string& key,
                           const std::string& id) {
  auto it = p.find(key);
  if (it == p.end()) {
    throw CatalogError("catalog id '" + id + "' requires parameter '" + key +
                       "'");
  }
  return it->second;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double parse_endpoint(const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return eval_scalar(s, "interval endpoint");
}

}  // namespace

SpacetimeModel minkowski(int n, int index) {
  if (n < 1 || index < 0 || index > n) {
    throw CatalogError("minkowski requires 1 <= dimension and 0 <= index <= "
                       "dimension");
  }
  SpacetimeModel m = flat_model("minkowski", n, index);
  if (index >= 1) m.add_killing(coordinate_killing("del_t", n, 0));
  return m;
}

SpacetimeModel torus_tau(const Expr& tau) {
  require_vars_subset(tau, {"x"}, "tau");
  std::vector<std::vector<Expr>> g{{c(0.0), c(1.0)}, {c(1.0), tau}};
  SpacetimeModel m = SpacetimeModel::analytic("torus_tau", {"x", "y"}, 1, g);
  m.set_compact(true);
  Vec p1(2), p2(2);
  p1 << 1.0, 0.0;
  p2 << 0.0, 1.0;
  m.add_period(p1);
  m.add_period(p2);
  m.add_killing(coordinate_killing("del_y", 2, 1));
  return m;
}

SpacetimeModel torus_efg(const Expr& E, const Expr& F, const Expr& G) {
  require_vars_subset(E, {"x"}, "E");
  require_vars_subset(F, {"x"}, "F");
  require_vars_subset(G, {"x"}, "G");
  // EG + F^2 > 0 sampled over one period.
  for (int i = 0; i <= 64; ++i) {
    Bindings b{{"x", i / 64.0}};
    const double d = E.eval(b) * G.eval(b) + std::pow(F.eval(b), 2);
    if (d <= 0.0) {
      throw CatalogError("torus_efg requires E*G + F^2 > 0; violated at x=" +
                         std::to_string(i / 64.0));
    }
  }
  std::vector<std::vector<Expr>> g{{E, F}, {F, -G}};
  SpacetimeModel m = SpacetimeModel::analytic("torus_efg", {"x", "y"}, 1, g);
  m.set_compact(true);
  Vec p1(2), p2(2);
  p1 << 1.0, 0.0;
  p2 << 0.0, 1.0;
  m.add_period(p1);
  m.add_period(p2);
  m.add_killing(coordinate_killing("del_y", 2, 1));
  return m;
}

SpacetimeModel clifton_pohl() {
  Expr omega = c(1.0) / (var("u") * var("u") + var("v") * var("v"));
  std::vector<std::vector<Expr>> g{{c(0.0), omega}, {omega, c(0.0)}};
  SpacetimeModel m = SpacetimeModel::analytic("clifton_pohl", {"u", "v"}, 1, g);
  m.set_domain([](const Vec& p) { return p.squaredNorm() > 0.0; });
  return m;
}

SpacetimeModel misner_cylinder() {
  std::vector<std::vector<Expr>> g{{c(0.0), c(1.0)},
                                   {c(1.0), c(-2.0) * var("x")}};
  SpacetimeModel m =
      SpacetimeModel::analytic("misner_cylinder", {"x", "y"}, 1, g);
  Vec period(2);
  period << 0.0, std::log(2.0);
  m.add_period(period);
  m.add_killing(coordinate_killing("del_y", 2, 1));
  return m;
}

SpacetimeModel misner_covering_uv() {
  std::vector<std::vector<Expr>> g{{c(0.0), c(1.0)}, {c(1.0), c(0.0)}};
  SpacetimeModel m =
      SpacetimeModel::analytic("misner_covering_uv", {"u", "v"}, 1, g);
  m.set_domain([](const Vec& p) { return p[0] > 0.0; });
  return m;
}

Vec misner_chart_to_uv(const Vec& xy) {
  Vec uv(2);
  uv << std::exp(xy[1]), xy[0] * std::exp(-xy[1]);
  return uv;
}

Vec misner_uv_to_chart(const Vec& uv) {
  if (uv[0] <= 0.0) throw CatalogError("Misner chart requires u > 0");
  Vec xy(2);
  xy << uv[0] * uv[1], std::log(uv[0]);
  return xy;
}

SpacetimeModel warped(const WarpedSpec& spec) {
  const SpacetimeModel& B = spec.base;
  const SpacetimeModel& F = spec.fiber;
  if (!B.is_analytic() || !F.is_analytic()) {
    throw CatalogError("warped products require analytic base and fiber");
  }
  std::vector<std::string> coords = B.coords();
  for (const auto& cn : F.coords()) {
    if (std::find(coords.begin(), coords.end(), cn) != coords.end()) {
      throw CatalogError("base and fiber coordinate names overlap: '" + cn +
                         "'");
    }
    coords.push_back(cn);
  }
  require_vars_subset(spec.f, B.coords(), "warping function");
  const int nb = B.dimension(), nf = F.dimension();
  const int n = nb + nf;
  std::vector<std::vector<Expr>> g(n, std::vector<Expr>(n, c(0.0)));
  for (int i = 0; i < nb; ++i) {
    for (int j = 0; j < nb; ++j) g[i][j] = B.metric_exprs()[i][j];
  }
  Expr f2 = spec.f * spec.f;
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nf; ++j) {
      g[nb + i][nb + j] = f2 * F.metric_exprs()[i][j];
    }
  }
  SpacetimeModel m = SpacetimeModel::analytic(
      "warped(" + B.id() + "," + F.id() + ")", coords, B.index() + F.index(),
      g);
  m.set_compact(B.compact() && F.compact());
  if (B.has_quotient() || F.has_quotient()) {
    for (const Vec& p : B.periods()) {
      Vec q = Vec::Zero(n);
      q.head(nb) = p;
      m.add_period(q);
    }
    for (const Vec& p : F.periods()) {
      Vec q = Vec::Zero(n);
      q.tail(nf) = p;
      m.add_period(q);
    }
  }
  auto bdom = B, fdom = F;  // capture copies for the domain closure
  m.set_domain([bdom, fdom, nb, nf](const Vec& p) {
    return bdom.in_domain(p.head(nb)) && fdom.in_domain(p.tail(nf));
  });
  // f > 0 at sampled base points.
  for (const Vec& p : sample_points(B, 64)) {
    if (spec.f.eval(B.bind(p)) <= 0.0) {
      throw CatalogError("warping function must be positive on the base");
    }
  }
  return m;
}

namespace {

SpacetimeModel interval_base(double a, double b) {
  SpacetimeModel base =
      SpacetimeModel::analytic("interval", {"t"}, 1, const_diag({-1.0}));
  if (std::isfinite(a) || std::isfinite(b)) {
    base.set_domain([a, b](const Vec& p) { return p[0] > a && p[0] < b; });
  }
  return base;
}

SpacetimeModel flat_fiber(int dim, int index) {
  std::vector<std::string> names;
  for (int i = 0; i < dim; ++i) names.push_back("x" + std::to_string(i + 1));
  std::vector<double> d(dim, 1.0);
  for (int i = 0; i < index; ++i) d[i] = -1.0;
  return SpacetimeModel::analytic("flat_fiber", names, index, const_diag(d));
}

}  // namespace

SpacetimeModel grw(const Expr& f, double a, double b,
                   const SpacetimeModel& fiber) {
  if (fiber.index() != 0) {
    throw CatalogError("GRW fibers must be Riemannian");
  }
  WarpedSpec spec{interval_base(a, b), f, fiber};
  require_vars_subset(f, {"t"}, "GRW warping function");
  SpacetimeModel m = warped(spec);
  // Rename for catalog lookup; structure unchanged.
  SpacetimeModel out = SpacetimeModel::analytic("grw", m.coords(), m.index(),
                                                m.metric_exprs());
  out.set_compact(m.compact());
  if (std::isfinite(a) || std::isfinite(b)) {
    out.set_domain([a, b](const Vec& p) { return p[0] > a && p[0] < b; });
  }
  for (const Vec& p : m.periods()) out.add_period(p);
  return out;
}

SpacetimeModel grw(const Expr& f, double a, double b, int fiber_dim) {
  return grw(f, a, b, flat_fiber(fiber_dim, 0));
}

namespace {

SpacetimeModel assemble_stationary(const std::string& id,
                                   const StationarySpec& spec) {
  const SpacetimeModel& M0 = spec.spatial;
  if (!M0.is_analytic() || M0.index() != 0) {
    throw CatalogError(id + " spacetimes need an analytic Riemannian spatial "
                            "model");
  }
  const int ns = M0.dimension();
  if (!spec.delta.empty() && static_cast<int>(spec.delta.size()) != ns) {
    throw CatalogError("delta must have one component per spatial coordinate");
  }
  require_vars_subset(spec.beta, M0.coords(), "beta");
  for (const auto& d : spec.delta) require_vars_subset(d, M0.coords(), "delta");
  std::vector<std::string> coords{"t"};
  for (const auto& cn : M0.coords()) {
    if (cn == "t") throw CatalogError("spatial coordinate 't' is reserved");
    coords.push_back(cn);
  }
  const int n = ns + 1;
  std::vector<std::vector<Expr>> g(n, std::vector<Expr>(n, c(0.0)));
  g[0][0] = -spec.beta;
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < ns; ++j) g[1 + i][1 + j] = M0.metric_exprs()[i][j];
  }
  if (!spec.delta.empty()) {
    for (int i = 0; i < ns; ++i) {
      Expr gi = c(0.0);
      for (int j = 0; j < ns; ++j) {
        gi = gi + M0.metric_exprs()[i][j] * spec.delta[j];
      }
      g[0][1 + i] = gi;
      g[1 + i][0] = gi;
    }
  }
  SpacetimeModel m = SpacetimeModel::analytic(id, coords, 1, g);
  m.set_compact(false);
  if (M0.has_quotient()) {
    for (const Vec& p : M0.periods()) {
      Vec q = Vec::Zero(n);
      q.tail(ns) = p;
      m.add_period(q);
    }
  }
  auto m0 = M0;
  m.set_domain([m0, ns](const Vec& p) { return m0.in_domain(p.tail(ns)); });
  m.add_killing(coordinate_killing("del_t", n, 0));
  validate_sampled(m);  // beta > 0 and Lorentz signature at samples
  for (const Vec& p : sample_points(M0, 64)) {
    if (spec.beta.eval(M0.bind(p)) <= 0.0) {
      throw CatalogError("beta must be positive on the spatial model");
    }
  }
  return m;
}

}  // namespace

SpacetimeModel static_spacetime(const StationarySpec& spec) {
  if (!spec.delta.empty()) {
    for (const auto& d : spec.delta) {
      if (!d.empty() && !(d.raw()->kind == ExprNode::Kind::Const &&
                          d.raw()->value == 0.0)) {
        throw CatalogError("static spacetimes require delta == 0");
      }
    }
  }
  StationarySpec s = spec;
  s.delta.clear();
  return assemble_stationary("static", s);
}

SpacetimeModel stationary(const StationarySpec& spec) {
  return assemble_stationary("stationary", spec);
}

SpacetimeModel splitting(const SplittingSpec& spec) {
  const int ns = spec.spatial_dim;
  if (ns < 1 || static_cast<int>(spec.alpha.size()) != ns) {
    throw CatalogError("alpha must be a spatial_dim x spatial_dim matrix");
  }
  std::vector<std::string> coords{"t"};
  std::vector<std::string> spatial = default_coords(ns, 0);
  coords.insert(coords.end(), spatial.begin(), spatial.end());
  const int n = ns + 1;
  std::vector<std::vector<Expr>> g(n, std::vector<Expr>(n, c(0.0)));
  g[0][0] = -spec.beta;
  for (int i = 0; i < ns; ++i) {
    if (static_cast<int>(spec.alpha[i].size()) != ns) {
      throw CatalogError("alpha must be a spatial_dim x spatial_dim matrix");
    }
    for (int j = 0; j < ns; ++j) {
      require_vars_subset(spec.alpha[i][j], coords, "alpha");
      g[1 + i][1 + j] = spec.alpha[i][j];
    }
  }
  require_vars_subset(spec.beta, coords, "beta");
  SpacetimeModel m = SpacetimeModel::analytic("splitting", coords, 1, g);
  // nu <= beta <= N and eig(alpha) >= lambda at samples.
  for (const Vec& p : sample_points(m, 64)) {
    const Bindings b = m.bind(p);
    const double beta = spec.beta.eval(b);
    if (spec.N > 0.0 && (beta < spec.nu || beta > spec.N)) {
      throw CatalogError("beta leaves its declared bounds at a sample");
    }
    Mat a(ns, ns);
    for (int i = 0; i < ns; ++i) {
      for (int j = 0; j < ns; ++j) a(i, j) = spec.alpha[i][j].eval(b);
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < spec.lambda) {
      throw CatalogError("alpha eigenvalue below lambda at a sample");
    }
  }
  return m;
}

SpacetimeModel anti_de_sitter_strip(double margin) {
  Expr omega = c(1.0) / (apply_unary(UnaryOp::Cos, var("x")) *
                         apply_unary(UnaryOp::Cos, var("x")));
  std::vector<std::vector<Expr>> g{{-omega, c(0.0)}, {c(0.0), omega}};
  SpacetimeModel m =
      SpacetimeModel::analytic("anti_de_sitter_strip", {"t", "x"}, 1, g);
  const double half = M_PI / 2.0 - margin;
  m.set_domain([half](const Vec& p) { return std::abs(p[1]) < half; });
  m.set_domain_margin(margin);
  m.add_killing(coordinate_killing("del_t", 2, 0));
  return m;
}

SpacetimeModel pseudosphere_model() {
  Expr ch = apply_unary(UnaryOp::Cosh, var("w"));
  std::vector<std::vector<Expr>> g{{c(-1.0), c(0.0)}, {c(0.0), ch * ch}};
  SpacetimeModel m =
      SpacetimeModel::analytic("pseudosphere", {"w", "phi"}, 1, g);
  Vec period(2);
  period << 0.0, 2.0 * M_PI;
  m.add_period(period);
  m.add_killing(coordinate_killing("del_phi", 2, 1));
  return m;
}

std::vector<std::string> catalog_ids() {
  return {"minkowski",   "torus_tau",      "torus_efg",
          "clifton_pohl", "misner_cylinder", "grw",
          "warped",       "static",          "stationary",
          "splitting",    "anti_de_sitter_strip", "pseudosphere"};
}

SpacetimeModel build(const std::string& id, const Params& params) {
  if (id == "minkowski") {
    const int n = static_cast<int>(eval_scalar(param_or(params, "n", "2"), "n"));
    const int s =
        static_cast<int>(eval_scalar(param_or(params, "index", "1"), "index"));
    return minkowski(n, s);
  }
  if (id == "torus_tau") return torus_tau(parse(param_required(params, "tau", id)));
  if (id == "torus_efg") {
    return torus_efg(parse(param_required(params, "E", id)),
                     parse(param_required(params, "F", id)),
                     parse(param_required(params, "G", id)));
  }
  if (id == "clifton_pohl") return clifton_pohl();
  if (id == "misner_cylinder") return misner_cylinder();
  if (id == "grw") {
    double a = -std::numeric_limits<double>::infinity();
    double b = std::numeric_limits<double>::infinity();
    if (params.count("interval")) {
      auto parts = split(params.at("interval"), ':');
      if (parts.size() != 2) throw CatalogError("interval must be 'A:B'");
      a = parse_endpoint(parts[0]);
      b = parse_endpoint(parts[1]);
    }
    const int fd = static_cast<int>(
        eval_scalar(param_or(params, "fiber_dim", "1"), "fiber_dim"));
    return grw(parse(param_required(params, "f", id)), a, b, fd);
  }
  if (id == "warped") {
    const int bd = static_cast<int>(
        eval_scalar(param_or(params, "base_dim", "1"), "base_dim"));
    const int fd = static_cast<int>(
        eval_scalar(param_or(params, "fiber_dim", "1"), "fiber_dim"));
    const int fi = static_cast<int>(
        eval_scalar(param_or(params, "fiber_index", "1"), "fiber_index"));
    SpacetimeModel base = flat_model("flat_base", bd, 0);
    WarpedSpec spec{base, parse(param_required(params, "f", id)),
                    flat_fiber(fd, fi)};
    return warped(spec);
  }
  if (id == "static" || id == "stationary") {
    const int sd = static_cast<int>(
        eval_scalar(param_or(params, "spatial_dim", "1"), "spatial_dim"));
    StationarySpec spec;
    spec.spatial = flat_model("flat_spatial", sd, 0);
    spec.beta = parse(param_required(params, "beta", id));
    if (id == "stationary") {
      for (const auto& part : split(param_required(params, "delta", id), ';')) {
        spec.delta.push_back(parse(part));
      }
    }
    return id == "static" ? static_spacetime(spec) : stationary(spec);
  }
  if (id == "splitting") {
    SplittingSpec spec;
    spec.spatial_dim = static_cast<int>(
        eval_scalar(param_or(params, "spatial_dim", "1"), "spatial_dim"));
    spec.beta = parse(param_required(params, "beta", id));
    for (const auto& row : split(param_required(params, "alpha", id), ';')) {
      std::vector<Expr> r;
      for (const auto& entry : split(row, ',')) r.push_back(parse(entry));
      spec.alpha.push_back(r);
    }
    spec.nu = eval_scalar(param_or(params, "nu", "0"), "nu");
    spec.N = eval_scalar(param_or(params, "N", "0"), "N");
    spec.lambda = eval_scalar(param_or(params, "lambda", "0"), "lambda");
    return splitting(spec);
  }
  if (id == "anti_de_sitter_strip") {
    return anti_de_sitter_strip(
        eval_scalar(param_or(params, "margin", "1e-9"), "margin"));
  }
  if (id == "pseudosphere") return pseudosphere_model();
  throw CatalogError("unknown catalog id '" + id + "'");
}

SpacetimeModel conformal_model(const SpacetimeModel& m, const Expr& omega) {
  require_vars_subset(omega, m.coords(), "conformal factor");
  SpacetimeModel out;
  if (m.is_analytic()) {
    const int n = m.dimension();
    std::vector<std::vector<Expr>> g(n, std::vector<Expr>(n));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) g[i][j] = omega * m.metric_exprs()[i][j];
    }
    out = SpacetimeModel::analytic("conformal(" + m.id() + ")", m.coords(),
                                   m.index(), g);
  } else {
    auto base = m;
    auto coords = m.coords();
    out = SpacetimeModel::numeric(
        "conformal(" + m.id() + ")", coords, m.index(),
        [base, omega](const Vec& p) {
          return omega.eval(base.bind(p)) * base.metric_raw(p);
        });
  }
  out.set_compact(m.compact());
  for (const Vec& p : m.periods()) out.add_period(p);
  auto base = m;
  out.set_domain([base](const Vec& p) { return base.in_domain(p); });
  out.set_domain_margin(m.domain_margin());
  // Omega > 0 at samples.
  for (const Vec& p : sample_points(out, 64)) {
    if (omega.eval(out.bind(p)) <= 0.0) {
      throw CatalogError("conformal factor must be positive on the domain");
    }
  }
  return out;
}

double gauss_curvature_torus_tau(const Expr& tau, double x) {
  require_vars_subset(tau, {"x"}, "tau");
  return 0.5 * tau.diff("x").diff("x").eval({{"x", x}});
}

double lorentz_inner(const Vec& x, const Vec& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw CatalogError("ambient vectors must share dimension >= 2");
  }
  return -x[0] * y[0] + x.tail(x.size() - 1).dot(y.tail(y.size() - 1));
}

PseudospherePoint pseudosphere_geodesic(const PseudospherePoint& p,
                                        const Vec& v, double s) {
  const Vec& a = p.ambient;
  if (std::abs(lorentz_inner(a, a) - 1.0) > 1e-10) {
    throw CatalogError("point is not on the pseudosphere");
  }
  if (v.size() != a.size()) {
    throw CatalogError("velocity dimension mismatch");
  }
  if (std::abs(lorentz_inner(a, v)) > 1e-10 * (1.0 + v.norm())) {
    throw CatalogError("velocity is not tangent to the pseudosphere");
  }
  const double q = lorentz_inner(v, v);
  const double scale = v.squaredNorm();
  PseudospherePoint out;
  if (scale == 0.0 || std::abs(q) <= 1e-14 * scale) {
    out.ambient = a + s * v;  // lightlike: straight line stays on the surface
  } else if (q > 0.0) {
    const double w = std::sqrt(q);
    out.ambient = std::cos(w * s) * a + (std::sin(w * s) / w) * v;
  } else {
    const double w = std::sqrt(-q);
    out.ambient = std::cosh(w * s) * a + (std::sinh(w * s) / w) * v;
  }
  return out;
}

bool pseudosphere_connectable(const PseudospherePoint& p,
                              const PseudospherePoint& q) {
  for (const Vec* a : {&p.ambient, &q.ambient}) {
    if (std::abs(lorentz_inner(*a, *a) - 1.0) > 1e-10) {
      throw CatalogError("point is not on the pseudosphere");
    }
  }
  return lorentz_inner(p.ambient, q.ambient) > -1.0;
}

}  // namespace lgeo
