#include "lgeo/completeness.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"

namespace lgeo {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Composite Simpson over [a, b].
double simpson(const std::function<double(double)>& f, double a, double b,
               int panels) {
  const double h = (b - a) / panels;
  double acc = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double x0 = a + i * h, x1 = x0 + h, xm = x0 + 0.5 * h;
    const double f0 = f(x0), f1 = f(x1), fm = f(xm);
    for (double v : {f0, f1, fm}) {
      if (std::isnan(v)) {
        throw CompletenessError("integrand not finite at x=" + fmt(xm));
      }
      if (v < -1e-12) {
        throw CompletenessError("integrand negative at a sample");
      }
      // Overflow of a nonnegative integrand is a divergence signal.
      if (std::isinf(v)) return v;
    }
    acc += h / 6.0 * (f0 + 4.0 * fm + f1);
  }
  return acc;
}

enum class Side { Past, Future };

// Side completeness from a divergence classification.
Verdict side_verdict(Divergence d) {
  switch (d) {
    case Divergence::Diverges:
      return Verdict::Complete;
    case Divergence::Converges:
      return Verdict::Incomplete;
    case Divergence::Inconclusive:
      return Verdict::Inconclusive;
  }
  return Verdict::Inconclusive;
}

Verdict combine_sides(Verdict a, Verdict b) {
  if (a == Verdict::Incomplete || b == Verdict::Incomplete) {
    return Verdict::Incomplete;
  }
  if (a == Verdict::Complete && b == Verdict::Complete) {
    return Verdict::Complete;
  }
  return Verdict::Inconclusive;
}

// Boundedness of f toward an endpoint, sampled on a geometric grid:
// {Bounded = 0, Unbounded = 1, Unclear = 2}.
int boundedness_toward(const std::function<double(double)>& f, double from,
                       double endpoint) {
  const int octaves = 40;
  std::vector<double> sup(octaves, 0.0);
  for (int j = 0; j < octaves; ++j) {
    double lo, hi;
    if (std::isinf(endpoint)) {
      const double d0 = std::pow(2.0, j) - 1.0, d1 = 2.0 * d0 + 1.0;
      lo = from + (endpoint > 0 ? d0 : -d1);
      hi = from + (endpoint > 0 ? d1 : -d0);
    } else {
      const double g0 = (endpoint - from) * std::pow(0.5, j);
      lo = endpoint - g0;
      hi = endpoint - 0.5 * g0;
      if (lo > hi) std::swap(lo, hi);
    }
    double s = 0.0;
    for (int i = 0; i <= 32; ++i) {
      s = std::max(s, f(lo + (hi - lo) * i / 32.0));
    }
    sup[j] = std::max(s, j > 0 ? sup[j - 1] : s);
  }
  const double last = sup[octaves - 1], prev = sup[octaves - 3];
  if (std::isinf(last)) return 1;                         // overflowed
  if (last > prev * 1.05) return 1;                       // still growing
  if (last <= prev * (1.0 + 1e-9)) return 0;              // stabilized
  return 2;
}

}  // namespace

std::string to_string(Divergence d) {
  switch (d) {
    case Divergence::Diverges:
      return "Diverges";
    case Divergence::Converges:
      return "Converges";
    case Divergence::Inconclusive:
      return "Inconclusive";
  }
  return "unknown";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Complete:
      return "Complete";
    case Verdict::Incomplete:
      return "Incomplete";
    case Verdict::Inconclusive:
      return "Inconclusive";
  }
  return "unknown";
}

DivergenceReport improper_integral_verdict(
    const std::function<double(double)>& integrand, double endpoint,
    const IntegralOptions& opts) {
  DivergenceReport rep;
  std::vector<double> increments;
  double total = 0.0;
  for (int j = 0; j < opts.octaves; ++j) {
    double lo, hi;
    if (std::isinf(endpoint)) {
      const double d0 = std::pow(2.0, j) - 1.0;
      const double d1 = 2.0 * d0 + 1.0;
      if (endpoint > 0) {
        lo = opts.start + d0;
        hi = opts.start + d1;
      } else {
        lo = opts.start - d1;
        hi = opts.start - d0;
      }
    } else {
      const double gap = (endpoint - opts.start) * std::pow(0.5, j);
      lo = endpoint - gap;
      hi = endpoint - 0.5 * gap;
      if (lo > hi) std::swap(lo, hi);
    }
    const double inc = simpson(integrand, lo, hi, opts.panels_per_octave);
    if (std::isinf(inc)) {
      rep.partials.push_back(inc);
      rep.value = inc;
      rep.classification = Divergence::Diverges;
      rep.growth_exponent = std::numeric_limits<double>::infinity();
      return rep;
    }
    increments.push_back(inc);
    total += inc;
    rep.partials.push_back(total);
  }
  rep.value = total;

  // Fitted per-octave growth exponent of the increments.
  {
    int used = 0;
    double acc = 0.0;
    const int J = static_cast<int>(increments.size());
    for (int j = J - 5; j < J - 1; ++j) {
      if (j >= 0 && increments[j] > 0.0 && increments[j + 1] > 0.0) {
        acc += std::log2(increments[j + 1] / increments[j]);
        ++used;
      }
    }
    rep.growth_exponent = used > 0 ? acc / used : 0.0;
  }

  const int J = static_cast<int>(rep.partials.size());
  bool diverges = total > 0.0 && J > 5;
  for (int j = J - 5; j < J && diverges; ++j) {
    if (rep.partials[j - 1] <= 0.0 ||
        rep.partials[j] / rep.partials[j - 1] < opts.diverge_factor) {
      diverges = false;
    }
  }
  if (diverges) {
    rep.classification = Divergence::Diverges;
    return rep;
  }

  const double last = increments[J - 1];
  const double prev = increments[J - 2];
  double tail = std::numeric_limits<double>::infinity();
  if (last == 0.0) {
    tail = 0.0;
  } else if (prev > 0.0 && last < prev) {
    const double q = last / prev;
    tail = last * q / (1.0 - q);
  }
  if (total == 0.0 || tail <= opts.converge_tail * std::max(total, 1e-300)) {
    rep.classification = Divergence::Converges;
    return rep;
  }
  rep.classification = Divergence::Inconclusive;
  return rep;
}

DivergenceReport improper_integral_verdict(const Expr& integrand,
                                           double endpoint,
                                           const IntegralOptions& opts) {
  const auto vars = integrand.variables();
  if (vars.size() > 1) {
    throw CompletenessError("integrand must depend on one variable");
  }
  const std::string v = vars.empty() ? "t" : vars[0];
  return improper_integral_verdict(
      [&](double x) { return integrand.eval({{v, x}}); }, endpoint, opts);
}

std::string verdict_json(const CompletenessVerdict& v) {
  nlohmann::json j;
  j["schema"] = "lgeo-completeness-verdict-1";
  j["type"]["timelike"] = to_string(v.timelike);
  j["type"]["lightlike"] = to_string(v.lightlike);
  j["type"]["spacelike"] = to_string(v.spacelike);
  j["evidence"] = nlohmann::json::array();
  for (const auto& e : v.evidence) {
    nlohmann::json je;
    je["criterion"] = e.criterion;
    je["citation"] = e.citation;
    je["values"] = e.values;
    j["evidence"].push_back(je);
  }
  return j.dump(2);
}

CompletenessVerdict classify_grw(const Expr& f, double a, double b,
                                 bool fiber_complete) {
  if (!(a < b)) throw CompletenessError("interval endpoints must satisfy a < b");
  const auto vars = f.variables();
  if (vars.size() > 1) {
    throw CompletenessError("warping function must depend on t only");
  }
  const std::string tv = vars.empty() ? "t" : vars[0];
  auto fv = [&](double t) {
    const double val = f.eval({{tv, t}});
    // val == 0 is accepted as underflow of a positive function.
    if (val < 0.0) {
      throw CompletenessError("warping function must be positive; f(" +
                              fmt(t) + ") < 0");
    }
    return val;
  };
  auto tl = [&](double t) {
    const double val = fv(t);
    if (std::isinf(val)) return 1.0;  // limit of f/sqrt(1+f^2)
    return val / std::sqrt(1.0 + val * val);
  };

  CompletenessVerdict v;
  if (!fiber_complete) {
    v.timelike = v.lightlike = v.spacelike = Verdict::Incomplete;
    v.evidence.push_back(
        {"incomplete-fiber",
         {},
         "an incomplete fiber makes the warped product incomplete in all "
         "three causal senses"});
    return v;
  }

  double c = 0.0;
  if (std::isfinite(a) && std::isfinite(b)) {
    c = 0.5 * (a + b);
  } else if (std::isfinite(a)) {
    c = a + 1.0;
  } else if (std::isfinite(b)) {
    c = b - 1.0;
  }

  IntegralOptions io;
  io.start = c;

  auto classify_side = [&](double endpoint, const std::string& side) {
    DivergenceReport rt = improper_integral_verdict(tl, endpoint, io);
    DivergenceReport rl = improper_integral_verdict(fv, endpoint, io);
    // f/sqrt(1+f^2) <= f, so its divergence forces divergence of f.
    if (rt.classification == Divergence::Diverges) {
      rl.classification = Divergence::Diverges;
    }
    if (rl.classification == Divergence::Converges) {
      rt.classification = Divergence::Converges;
    }
    Verdict timelike = side_verdict(rt.classification);
    Verdict lightlike = side_verdict(rl.classification);
    Verdict spacelike;
    int unb = -1;
    if (rl.classification == Divergence::Diverges) {
      spacelike = Verdict::Complete;
    } else if (rl.classification == Divergence::Converges) {
      unb = boundedness_toward(fv, c, endpoint);
      spacelike = unb == 1   ? Verdict::Complete
                  : unb == 0 ? Verdict::Incomplete
                             : Verdict::Inconclusive;
    } else {
      spacelike = Verdict::Inconclusive;
    }
    Evidence e;
    e.criterion = "grw-tail-integrals (" + side + ")";
    e.citation =
        "GRW classification: timelike needs divergence of the tail of "
        "f/sqrt(1+f^2); lightlike needs divergence of the tail of f; "
        "spacelike needs the lightlike condition or, for a finite f-tail, "
        "unboundedness of f on that side";
    e.values["integral_f_over_sqrt"] = to_string(rt.classification);
    e.values["integral_f"] = to_string(rl.classification);
    e.values["partial_f"] = fmt(rl.partials.back());
    if (unb >= 0) {
      e.values["f_unbounded"] =
          unb == 1 ? "yes" : (unb == 0 ? "no" : "unclear");
    }
    v.evidence.push_back(e);
    return std::array<Verdict, 3>{timelike, lightlike, spacelike};
  };

  const auto past = classify_side(a, "past");
  const auto future = classify_side(b, "future");
  v.timelike = combine_sides(past[0], future[0]);
  v.lightlike = combine_sides(past[1], future[1]);
  v.spacelike = combine_sides(past[2], future[2]);
  return v;
}

std::vector<double> f_inf_profile(const SpacetimeModel& base, const Expr& f,
                                  const Vec& x0,
                                  const std::vector<double>& radii,
                                  int directions) {
  const int n = base.dimension();
  if (x0.size() != n) throw CompletenessError("x0 dimension mismatch");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (radii[i] <= radii[i - 1]) {
      throw CompletenessError("radii must be increasing");
    }
  }
  std::vector<double> out;
  if (n == 1) {
    for (double r : radii) {
      out.push_back(std::min(f.eval(base.bind(Vec::Constant(1, x0[0] - r))),
                             f.eval(base.bind(Vec::Constant(1, x0[0] + r)))));
    }
    return out;
  }
  // Flat Euclidean bases only: distance spheres are round spheres.
  for (const auto& row : base.metric_exprs()) {
    for (const auto& e : row) {
      if (!e.variables().empty()) {
        throw CompletenessError(
            "f_inf profiles are only available on 1-D or flat Euclidean "
            "bases");
      }
    }
  }
  std::mt19937 rng(7041u);
  std::normal_distribution<double> gauss;
  std::vector<Vec> dirs;
  for (int i = 0; i < directions; ++i) {
    Vec d(n);
    for (int j = 0; j < n; ++j) d[j] = gauss(rng);
    if (d.norm() > 1e-12) dirs.push_back(d.normalized());
  }
  for (double r : radii) {
    double m = std::numeric_limits<double>::infinity();
    for (const Vec& d : dirs) {
      m = std::min(m, f.eval(base.bind(x0 + r * d)));
    }
    out.push_back(m);
  }
  return out;
}

CompletenessVerdict classify_warped_radial(const SpacetimeModel& base,
                                           const Expr& f, const Vec& x0,
                                           bool fiber_complete,
                                           bool f_radial) {
  CompletenessVerdict v;
  if (!fiber_complete) {
    v.timelike = v.lightlike = v.spacelike = Verdict::Incomplete;
    v.evidence.push_back(
        {"incomplete-fiber",
         {},
         "an incomplete fiber makes the warped product incomplete in all "
         "three causal senses"});
    return v;
  }
  if (base.compact()) {
    v.timelike = v.lightlike = v.spacelike = Verdict::Complete;
    v.evidence.push_back(
        {"compact-base",
         {},
         "a compact complete Riemannian base makes the triple warped "
         "complete for every positive warping function"});
    return v;
  }

  // f_inf(r) as a callable; exact for 1-D bases.
  const bool exact = base.dimension() == 1 || f_radial;
  auto f_inf = [&](double r) {
    return f_inf_profile(base, f, x0, {std::max(r, 1e-12)})[0];
  };
  IntegralOptions io;
  io.octaves = 30;  // n-D profile evaluations are costlier
  const double inf = std::numeric_limits<double>::infinity();
  DivergenceReport ra = improper_integral_verdict(
      [&](double r) {
        const double fi = f_inf(r);
        if (std::isinf(fi)) return 1.0;
        return fi / std::sqrt(1.0 + fi * fi);
      },
      inf, io);
  DivergenceReport rb = improper_integral_verdict(f_inf, inf, io);
  if (ra.classification == Divergence::Diverges) {
    rb.classification = Divergence::Diverges;  // integrand dominance
  }
  const int unb = boundedness_toward(f_inf, 0.0, inf);

  const bool cond_a = ra.classification == Divergence::Diverges;
  const bool cond_b = rb.classification == Divergence::Diverges;
  const bool not_a = ra.classification == Divergence::Converges;
  const bool not_b = rb.classification == Divergence::Converges;

  auto decide = [&](bool complete_if, bool incomplete_if) {
    if (complete_if) return Verdict::Complete;
    if (exact && incomplete_if) return Verdict::Incomplete;
    return Verdict::Inconclusive;
  };
  v.spacelike = decide(cond_a, not_a);
  v.lightlike = decide(cond_a || cond_b, not_b);
  v.timelike = decide(cond_a || cond_b || unb == 1, not_b && unb == 0);

  Evidence e;
  e.criterion = "warped-f_inf-integrals";
  e.citation =
      "warped completeness on a complete noncompact Riemannian base: "
      "divergence of the f_inf/sqrt(1+f_inf^2) integral gives warped "
      "completeness; divergence of the f_inf integral gives timelike and "
      "lightlike completeness; that condition or unbounded f_inf gives "
      "timelike completeness; converses hold for radial f";
  e.values["integral_a"] = to_string(ra.classification);
  e.values["integral_b"] = to_string(rb.classification);
  e.values["f_inf_unbounded"] = unb == 1 ? "yes" : (unb == 0 ? "no" : "unclear");
  e.values["converses_applicable"] = exact ? "yes" : "no";
  v.evidence.push_back(e);
  return v;
}

WarpedProjection warped_projection_integrate(const WarpedSpec& spec, double C,
                                             const Vec& base_point,
                                             const Vec& base_velocity,
                                             double span,
                                             const OdeOptions& opts) {
  const SpacetimeModel& B = spec.base;
  const int n = B.dimension();
  if (C < 0.0 && spec.fiber.index() == 0) {
    throw CompletenessError(
        "the fiber constant is nonnegative for Riemannian fibers");
  }
  std::vector<Expr> df;
  for (const auto& cn : B.coords()) df.push_back(spec.f.diff(cn));

  OdeRhs rhs = [&, n](double, const Vec& y, Vec& dy) {
    const Vec x = y.head(n), v = y.tail(n);
    if (!B.in_domain(x)) return false;
    const Bindings bnd = B.bind(x);
    const double fx = spec.f.eval(bnd);
    if (fx <= 0.0) return false;
    Vec grad(n);
    for (int i = 0; i < n; ++i) grad[i] = df[i].eval(bnd);
    Mat g = B.metric_raw(x);
    const Vec grad_up = g.ldlt().solve(grad);  // raise the index with g_B
    GeodesicState acc;
    try {
      acc = geodesic_rhs(B, GeodesicState{x, v});
    } catch (const GeometryError&) {
      return false;
    }
    dy.resize(2 * n);
    dy.head(n) = v;
    dy.tail(n) = acc.velocity + (C / std::pow(fx, 3)) * grad_up;
    return true;
  };

  Vec y0(2 * n);
  y0.head(n) = base_point;
  y0.tail(n) = base_velocity;
  OdeOptions oo = opts;
  if (!oo.norm_fn) {
    oo.norm_fn = [n](const Vec& y) { return y.tail(n).norm(); };
    oo.theta = 1e8 * (1.0 + base_velocity.norm());
  }
  WarpedProjection out;
  out.ode = integrate_ode(rhs, 0.0, span, y0, oo);

  const Mat g0 = B.metric_raw(base_point);
  const double f0 = spec.f.eval(B.bind(base_point));
  const double D =
      base_velocity.dot(g0 * base_velocity) + C / (f0 * f0);
  out.causal_constant = D;
  const double scale = base_velocity.squaredNorm() + std::abs(C);
  if (std::abs(D) <= kNullTolerance * std::max(scale, 1.0)) {
    out.character = CausalCharacter::Lightlike;
  } else {
    out.character =
        D < 0.0 ? CausalCharacter::Timelike : CausalCharacter::Spacelike;
  }
  return out;
}

KillingCertificate killing_certificate(const SpacetimeModel& m,
                                       double tolerance, int samples) {
  if (m.killing_fields().empty()) {
    throw CompletenessError("model declares no Killing candidates");
  }
  KillingCertificate cert;
  cert.compact = m.compact();
  const int n = m.dimension();
  const int nk = static_cast<int>(m.killing_fields().size());

  std::mt19937 rng(91101u);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  std::vector<Vec> pts;
  int attempts = 0;
  while (static_cast<int>(pts.size()) < samples && attempts < 50 * samples) {
    ++attempts;
    Vec p(n);
    for (int i = 0; i < n; ++i) p[i] = u(rng);
    if (m.in_domain(p)) pts.push_back(p);
  }

  // Symbolic coordinate derivatives of every candidate field.
  std::vector<std::vector<std::vector<Expr>>> dK(nk);
  for (int a = 0; a < nk; ++a) {
    const auto& K = m.killing_fields()[a];
    dK[a].resize(n);
    for (int i = 0; i < n; ++i) {
      dK[a][i].reserve(n);
      for (int l = 0; l < n; ++l) {
        dK[a][i].push_back(K.components[l].diff(m.coords()[i]));
      }
    }
  }

  bool lie_ok = true, causal_ok = true, bound_ok = true;
  std::string refutation;
  double max_lie = 0.0, sup_sigma = 0.0, sup_ginv = 0.0;

  for (const Vec& p : pts) {
    const Bindings b = m.bind(p);
    const Mat g = m.metric_raw(p);
    std::vector<Mat> dg(n);
    for (int k = 0; k < n; ++k) dg[k] = m.metric_derivative(p, k);

    Mat gram(nk, nk);
    std::vector<Vec> kvals(nk, Vec(n));
    for (int a = 0; a < nk; ++a) {
      const auto& K = m.killing_fields()[a];
      for (int l = 0; l < n; ++l) kvals[a][l] = K.components[l].eval(b);
      const double sigma = K.sigma.empty() ? 0.0 : K.sigma.eval(b);
      sup_sigma = std::max(sup_sigma, std::abs(sigma));
      // (L_K g)_ij = K^l dg_ij/dx^l + g_lj dK^l/dx^i + g_il dK^l/dx^j,
      // compared against 2 sigma g_ij.
      for (int i = 0; i < n && lie_ok; ++i) {
        for (int j = 0; j < n; ++j) {
          double lie = 0.0;
          for (int l = 0; l < n; ++l) {
            lie += kvals[a][l] * dg[l](i, j) +
                   g(l, j) * dK[a][i][l].eval(b) +
                   g(i, l) * dK[a][j][l].eval(b);
          }
          const double res = std::abs(lie - 2.0 * sigma * g(i, j));
          max_lie = std::max(max_lie, res);
          if (res > tolerance * (1.0 + std::abs(g(i, j)))) {
            lie_ok = false;
            refutation = "conformal-Killing identity fails for '" + K.name +
                         "' at a sample";
            break;
          }
        }
      }
    }
    for (int a = 0; a < nk; ++a) {
      for (int c2 = 0; c2 < nk; ++c2) {
        gram(a, c2) = kvals[a].dot(g * kvals[c2]);
      }
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(gram, Eigen::EigenvaluesOnly);
    if (causal_ok && es.eigenvalues().maxCoeff() >= 0.0) {
      causal_ok = false;
      refutation =
          "the candidate fields do not span a negative-definite subspace "
          "at a sample";
    }
    sup_ginv = std::max(sup_ginv, g.inverse().squaredNorm());
  }

  if (!m.compact()) {
    // sup over growing radii must stabilize for the boundedness hypotheses.
    double prev_sigma = 0.0, prev_ginv = 0.0;
    for (double r : {4.0, 8.0, 16.0}) {
      double ss = 0.0, sg = 0.0;
      std::uniform_real_distribution<double> ur(-r, r);
      for (int i = 0; i < samples; ++i) {
        Vec p(n);
        for (int j = 0; j < n; ++j) p[j] = ur(rng);
        if (!m.in_domain(p)) continue;
        const Bindings b = m.bind(p);
        for (const auto& K : m.killing_fields()) {
          if (!K.sigma.empty()) ss = std::max(ss, std::abs(K.sigma.eval(b)));
        }
        sg = std::max(sg, m.metric_raw(p).inverse().squaredNorm());
      }
      if (r == 16.0 && (ss > prev_sigma * 1.05 + 1e-12 ||
                        sg > prev_ginv * 1.05 + 1e-12)) {
        bound_ok = false;
        refutation =
            "sigma or the inverse-metric norm keeps growing with the "
            "sampling radius";
      }
      prev_sigma = std::max(prev_sigma, ss);
      prev_ginv = std::max(prev_ginv, sg);
    }
  }

  cert.checks.push_back({"conformal-killing-identity", lie_ok,
                         "max residual " + fmt(max_lie)});
  cert.checks.push_back({"timelike-span", causal_ok,
                         "Gram matrix negative definite at all samples"});
  cert.checks.push_back({"bounded-sigma-and-inverse-metric", bound_ok,
                         "sup |sigma| " + fmt(sup_sigma) +
                             ", sup |g^-1|_F^2 " + fmt(sup_ginv)});
  cert.checks.push_back({"compact", m.compact(),
                         m.compact() ? "declared compact"
                                     : "model is not declared compact"});
  cert.pointwise_ok = lie_ok && causal_ok && bound_ok;
  if (!cert.pointwise_ok) {
    cert.summary = "Refuted: " + refutation;
  } else if (m.compact()) {
    cert.summary = "Certified";
  } else {
    cert.summary =
        "Certified (noncompact; completeness additionally needs a complete "
        "auxiliary Riemannian metric)";
  }
  return cert;
}

}  // namespace lgeo
