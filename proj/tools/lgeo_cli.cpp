// Command-line front end: build catalog models, integrate geodesics,
// classify completeness, solve connectedness problems, and test the
// pseudosphere predicate. Outputs are plain text by default, CSV/JSON on
// request; exit code 0 = success, 2 = NotFound/Inconclusive, 1 = error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lgeo/catalog.hpp"
#include "lgeo/completeness.hpp"
#include "lgeo/integrator.hpp"
#include "lgeo/variational.hpp"

namespace {

using lgeo::Vec;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Vec parse_vector(const std::string& text, const char* what) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      vals.push_back(lgeo::parse(item).eval({}));
    } catch (const std::exception& e) {
      throw CLI::ValidationError(std::string(what) + ": bad entry '" + item +
                                 "' (" + e.what() + ")");
    }
  }
  if (vals.empty())
    throw CLI::ValidationError(std::string(what) + ": empty vector");
  Vec out(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    out(static_cast<int>(i)) = vals[i];
  return out;
}

std::pair<double, double> parse_span(const std::string& text) {
  auto pos = text.find(':');
  if (pos == std::string::npos)
    throw CLI::ValidationError("span must be 'A:B'");
  auto endpoint = [](const std::string& s) {
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return lgeo::parse(s).eval({});
  };
  return {endpoint(text.substr(0, pos)), endpoint(text.substr(pos + 1))};
}

lgeo::Params parse_params(const std::vector<std::string>& kvs) {
  lgeo::Params params;
  for (const auto& kv : kvs) {
    auto pos = kv.find('=');
    if (pos == std::string::npos)
      throw CLI::ValidationError("param must be key=value: '" + kv + "'");
    params[kv.substr(0, pos)] = kv.substr(pos + 1);
  }
  return params;
}

lgeo::SpacetimeModel flat_riemannian(int dim) {
  static const char* names[] = {"x", "y", "z"};
  if (dim < 1 || dim > 3)
    throw CLI::ValidationError("spatial dimension must be 1..3");
  std::vector<std::string> coords(names, names + dim);
  std::vector<std::vector<lgeo::Expr>> g(
      dim, std::vector<lgeo::Expr>(dim, lgeo::Expr::constant(0.0)));
  for (int i = 0; i < dim; ++i) g[i][i] = lgeo::Expr::constant(1.0);
  return lgeo::SpacetimeModel::analytic("flat_spatial", coords, 0, g);
}

std::vector<lgeo::Expr> parse_expr_list(const std::string& text) {
  std::vector<lgeo::Expr> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) out.push_back(lgeo::parse(item));
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << content;
}

int verdict_exit(const lgeo::CompletenessVerdict& v) {
  using lgeo::Verdict;
  bool inconclusive = v.timelike == Verdict::Inconclusive ||
                      v.lightlike == Verdict::Inconclusive ||
                      v.spacelike == Verdict::Inconclusive;
  return inconclusive ? 2 : 0;
}

void print_verdict(const lgeo::CompletenessVerdict& v, bool json) {
  if (json) {
    std::cout << lgeo::verdict_json(v) << "\n";
    return;
  }
  std::cout << "timelike:  " << lgeo::to_string(v.timelike) << "\n"
            << "lightlike: " << lgeo::to_string(v.lightlike) << "\n"
            << "spacelike: " << lgeo::to_string(v.spacelike) << "\n";
  for (const auto& e : v.evidence) {
    std::cout << "evidence: " << e.criterion << "\n";
    for (const auto& [k, val] : e.values)
      std::cout << "  " << k << " = " << val << "\n";
    std::cout << "  citation: " << e.citation << "\n";
  }
}

void print_connect(const lgeo::ConnectednessResult& r,
                   const std::string& citation, bool json) {
  if (json) {
    std::cout << lgeo::connectedness_json(r) << "\n";
    return;
  }
  std::cout << "status: " << lgeo::to_string(r.status) << "\n"
            << "diagnostic: " << r.diagnostic << "\n";
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    const auto& rec = r.records[i];
    std::cout << "geodesic " << i << ": action=" << fmt(rec.action)
              << " residual=" << fmt(rec.residual)
              << " endpoint_error=" << fmt(rec.endpoint_error);
    if (!rec.winding.empty()) {
      std::cout << " winding=";
      for (std::size_t d = 0; d < rec.winding.size(); ++d)
        std::cout << (d ? "," : "") << rec.winding[d];
    }
    std::cout << "\n";
  }
  std::cout << "citation: " << citation << "\n";
}

void maybe_write_trajectories(const lgeo::ConnectednessResult& r,
                              const lgeo::SpacetimeModel& m,
                              const std::string& prefix) {
  if (prefix.empty()) return;
  for (std::size_t i = 0; i < r.records.size(); ++i)
    write_file(prefix + "_" + std::to_string(i) + ".csv",
               lgeo::trajectory_csv(m, r.records[i].trajectory));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lorentz_geodesy: geodesic flow, completeness criteria, and "
               "geodesic connectedness on chart-based Lorentzian models"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file ([section] = "
                                 "subcommand, flags override)");
  long seed = 20240817;
  app.add_option("--seed", seed,
                 "seed for randomized multistart initializers");

  // catalog list
  auto* cat = app.add_subcommand("catalog", "catalog queries");
  auto* cat_list = cat->add_subcommand("list", "list model identifiers");

  // integrate
  auto* integ = app.add_subcommand("integrate", "integrate one geodesic");
  std::string i_model, i_point, i_velocity, i_span = "0:1", i_out;
  std::vector<std::string> i_params;
  double i_rtol = 1e-10, i_atol = 1e-12, i_theta = 0.0;
  bool i_json = false;
  integ->add_option("--model", i_model, "catalog id")->required();
  integ->add_option("-P,--param", i_params, "model parameter key=value");
  integ->add_option("--point", i_point, "initial point, comma separated")
      ->required();
  integ->add_option("--velocity", i_velocity, "initial velocity")->required();
  integ->add_option("--span", i_span, "parameter span A:B");
  integ->add_option("--out", i_out, "trajectory CSV path");
  integ->add_option("--rtol", i_rtol, "relative tolerance");
  integ->add_option("--atol", i_atol, "absolute tolerance");
  integ->add_option("--theta", i_theta, "blow-up threshold (0 = automatic)");
  integ->add_flag("--json", i_json, "machine-readable summary");

  // completeness grw | warped
  auto* comp = app.add_subcommand("completeness", "completeness classifiers");
  auto* cgrw = comp->add_subcommand("grw", "-dt^2 + f(t)^2 g_F on (a,b)");
  std::string g_f, g_interval = "-inf:inf";
  bool g_fiber_incomplete = false, g_json = false;
  cgrw->add_option("--f", g_f, "warping function of t")->required();
  cgrw->add_option("--interval", g_interval, "domain A:B (inf allowed)");
  cgrw->add_flag("--fiber-incomplete", g_fiber_incomplete,
                 "declare the fiber incomplete");
  cgrw->add_flag("--json", g_json, "machine-readable verdict");

  auto* cwarp = comp->add_subcommand("warped", "g_B + f(x)^2 g_F, flat base");
  std::string w_f, w_x0 = "0";
  int w_base_dim = 1;
  bool w_radial = false, w_fiber_incomplete = false, w_json = false;
  cwarp->add_option("--f", w_f, "warping function of the base coordinates")
      ->required();
  cwarp->add_option("--x0", w_x0, "base center point");
  cwarp->add_option("--base-dim", w_base_dim, "base dimension");
  cwarp->add_flag("--f-radial", w_radial, "f depends only on distance to x0");
  cwarp->add_flag("--fiber-incomplete", w_fiber_incomplete,
                  "declare the fiber incomplete");
  cwarp->add_flag("--json", w_json, "machine-readable verdict");

  // connect static | stationary | splitting
  auto* conn = app.add_subcommand("connect", "two-point geodesic problems");
  std::string c_p, c_q, c_out;
  int c_dim = 1, c_N = 64, c_modes = 16, c_windings = 0, c_iters = 2000;
  bool c_json = false;
  std::string c_beta = "1", c_delta, c_alpha, c_period, c_model;
  double c_margin = 1e-9;
  auto* cstat = conn->add_subcommand("static", "-beta dt^2 + flat spatial");
  auto* csta = conn->add_subcommand("stationary",
                                    "adds the cross term 2<delta,dx>dt");
  auto* cspl = conn->add_subcommand("splitting",
                                    "-beta(t,x) dt^2 + <alpha(t,x) dx, dx>");
  conn->require_subcommand(1);
  for (auto* sub : {cstat, csta, cspl}) {
    sub->add_option("--p", c_p, "start event t,x,...")->required();
    sub->add_option("--q", c_q, "end event t,x,...")->required();
    sub->add_option("--beta", c_beta, "coefficient of -dt^2");
    sub->add_option("--spatial-dim", c_dim, "spatial dimension (1..3)");
    sub->add_option("--segments", c_N, "spatial path segments");
    sub->add_option("--max-iters", c_iters, "iteration budget");
    sub->add_option("--out", c_out, "trajectory CSV prefix");
    sub->add_flag("--json", c_json, "machine-readable result");
  }
  cstat->add_option("--period", c_period,
                    "spatial period lengths (semicolon list) for a torus");
  cstat->add_option("--windings", c_windings,
                    "multistart over winding classes |k| <= K");
  cstat->add_option("--model", c_model,
                    "preset spatial geometry (anti_de_sitter_strip)");
  cstat->add_option("--margin", c_margin, "domain margin for presets");
  csta->add_option("--delta", c_delta, "shift components, semicolon list")
      ->required();
  cspl->add_option("--alpha", c_alpha,
                   "spatial coefficient matrix, rows ';', entries ','")
      ->required();
  cspl->add_option("--modes", c_modes, "Galerkin time modes");

  // pseudosphere
  auto* psph = app.add_subcommand("pseudosphere",
                                  "connectability on the unit pseudosphere");
  std::string s_p, s_q;
  bool s_json = false;
  psph->add_option("--p", s_p, "ambient coordinates of p (n+1 entries)")
      ->required();
  psph->add_option("--q", s_q, "ambient coordinates of q")->required();
  psph->add_flag("--json", s_json, "machine-readable result");

  CLI11_PARSE(app, argc, argv);
  (void)seed;

  try {
    if (cat_list->parsed()) {
      for (const auto& id : lgeo::catalog_ids()) std::cout << id << "\n";
      return 0;
    }

    if (integ->parsed()) {
      lgeo::SpacetimeModel m = lgeo::build(i_model, parse_params(i_params));
      Vec point = parse_vector(i_point, "--point");
      Vec velocity = parse_vector(i_velocity, "--velocity");
      auto [s0, s1] = parse_span(i_span);
      lgeo::IntegratorOptions opts;
      opts.rtol = i_rtol;
      opts.atol = i_atol;
      opts.theta = i_theta;
      opts.span_begin = s0;
      opts.span_end = s1;
      lgeo::GeodesicSolution sol = lgeo::integrate_geodesic(m, point, velocity,
                                                            opts);
      if (!i_out.empty()) write_file(i_out, lgeo::trajectory_csv(m, sol));
      if (i_json) {
        std::cout << lgeo::summary_json(sol) << "\n";
      } else {
        std::cout << "termination: " << lgeo::to_string(sol.termination)
                  << "\nsamples: " << sol.size() << "\n";
        if (sol.termination == lgeo::Termination::BlowUp)
          std::cout << "b_hat: " << fmt(sol.b_hat)
                    << "\nconfidence: " << fmt(sol.confidence) << "\n";
        if (!sol.winding.empty()) {
          std::cout << "winding:";
          for (long w : sol.winding) std::cout << " " << w;
          std::cout << "\n";
        }
        std::cout << "citation: "
                  << (sol.termination == lgeo::Termination::BlowUp
                          ? "finite-parameter incompleteness: the reciprocal "
                            "auxiliary speed extrapolates linearly to zero at "
                            "a finite parameter value"
                          : "the geodesic extends across the requested "
                            "parameter span")
                  << "\n";
      }
      return 0;
    }

    if (cgrw->parsed()) {
      auto [a, b] = parse_span(g_interval);
      lgeo::CompletenessVerdict v =
          lgeo::classify_grw(lgeo::parse(g_f), a, b, !g_fiber_incomplete);
      print_verdict(v, g_json);
      return verdict_exit(v);
    }

    if (cwarp->parsed()) {
      lgeo::SpacetimeModel base = flat_riemannian(w_base_dim);
      Vec x0 = parse_vector(w_x0, "--x0");
      lgeo::CompletenessVerdict v = lgeo::classify_warped_radial(
          base, lgeo::parse(w_f), x0, !w_fiber_incomplete, w_radial);
      print_verdict(v, w_json);
      return verdict_exit(v);
    }

    if (conn->parsed()) {
      Vec p = parse_vector(c_p, "--p");
      Vec q = parse_vector(c_q, "--q");
      lgeo::ConnectOptions opts;
      opts.N = c_N;
      opts.m_modes = c_modes;
      opts.max_iters = c_iters;

      lgeo::ConnectednessResult r;
      std::string citation;
      if (cspl->parsed()) {
        lgeo::SplittingSpec spec;
        spec.spatial_dim = c_dim;
        spec.beta = lgeo::parse(c_beta);
        std::stringstream rows(c_alpha);
        std::string row;
        while (std::getline(rows, row, ';')) {
          std::vector<lgeo::Expr> rexprs;
          std::stringstream cols(row);
          std::string cell;
          while (std::getline(cols, cell, ','))
            rexprs.push_back(lgeo::parse(cell));
          spec.alpha.push_back(rexprs);
        }
        r = lgeo::solve_splitting_saddle(spec, p, q, opts);
        citation =
            "critical points of the penalized action (spatial energy minus "
            "beta t'^2, minus the cut-function of the t' norm) with inert "
            "penalty are geodesics; the result is re-verified by shooting";
        maybe_write_trajectories(r, lgeo::splitting(spec), c_out);
      } else {
        lgeo::StationarySpec spec;
        if (!c_model.empty()) {
          if (c_model != "anti_de_sitter_strip")
            throw CLI::ValidationError("unknown preset '" + c_model + "'");
          spec.spatial = lgeo::SpacetimeModel::analytic(
              "ads_strip_spatial", {"x"}, 0, {{lgeo::parse("1/cos(x)^2")}});
          double margin = c_margin;
          spec.spatial.set_domain([margin](const Vec& x) {
            return std::abs(x(0)) < std::acos(-1.0) / 2.0 - margin;
          });
          spec.spatial.set_domain_margin(margin);
          spec.beta = lgeo::parse("1/cos(x)^2");
        } else {
          spec.spatial = flat_riemannian(c_dim);
          spec.beta = lgeo::parse(c_beta);
          if (!c_period.empty()) {
            auto lengths = parse_expr_list(c_period);
            for (std::size_t d = 0;
                 d < lengths.size() && d < static_cast<std::size_t>(c_dim); ++d) {
              Vec period = Vec::Zero(c_dim);
              period(static_cast<int>(d)) = lengths[d].eval({});
              spec.spatial.add_period(period);
            }
          }
        }
        if (csta->parsed()) {
          spec.delta = parse_expr_list(c_delta);
          r = lgeo::stationary_connect_shooting(spec, p, q, opts);
          citation =
              "the conserved charge of the time translation reduces the "
              "geodesic equation to a spatial second-order system; endpoints "
              "are matched by Newton shooting over (charge, initial velocity)";
          maybe_write_trajectories(r, lgeo::stationary(spec), c_out);
        } else {
          if (c_windings > 0)
            r = lgeo::multistart_windings(spec, p, q, c_windings, opts);
          else
            r = lgeo::minimize_connect_static(spec, p, q, opts);
          citation =
              "geodesics are critical points of the reduced action (spatial "
              "energy minus squared time gap over the integral of 1/beta); "
              "discrete minimizers are refined by shooting on the geodesic "
              "equation";
          maybe_write_trajectories(r, lgeo::static_spacetime(spec), c_out);
        }
      }
      print_connect(r, citation, c_json);
      return r.status == lgeo::ConnectStatus::Found ? 0 : 2;
    }

    if (psph->parsed()) {
      Vec pv = parse_vector(s_p, "--p");
      Vec qv = parse_vector(s_q, "--q");
      if (pv.size() != qv.size())
        throw CLI::ValidationError("p and q must have the same dimension");
      for (const Vec* v : {&pv, &qv})
        if (std::abs(lgeo::lorentz_inner(*v, *v) - 1.0) > 1e-9)
          throw CLI::ValidationError(
              "points must satisfy <p,p>_1 = 1 within 1e-9");
      lgeo::PseudospherePoint p{pv}, q{qv};
      double inner = lgeo::lorentz_inner(pv, qv);
      bool ok = lgeo::pseudosphere_connectable(p, q);
      const char* citation =
          "two points of the unit pseudosphere are connectable by a geodesic "
          "exactly when their ambient Lorentzian inner product exceeds -1";
      if (s_json) {
        std::cout << "{\n  \"schema\": \"lgeo-pseudosphere-1\",\n"
                  << "  \"inner\": " << fmt(inner) << ",\n"
                  << "  \"connectable\": " << (ok ? "true" : "false") << ",\n"
                  << "  \"citation\": \"" << citation << "\"\n}\n";
      } else {
        std::cout << (ok ? "connectable" : "not connectable")
                  << " (inner product " << fmt(inner) << ")\n"
                  << "citation: " << citation << "\n";
      }
      return ok ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no subcommand executed\n";
  return 1;
}
