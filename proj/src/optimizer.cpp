#include "cneumann/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "cneumann/errors.hpp"
#include "cneumann/mesh.hpp"
#include "cneumann/sensitivity.hpp"

namespace cneumann {

std::string to_string(Functional f) {
  switch (f) {
    case Functional::DiameterSquaredMu: return "diam2mu";
    case Functional::PerimeterSquaredMu: return "perim2mu";
    case Functional::AreaMu: return "areamu";
  }
  return "?";
}

std::string to_string(Sense s) { return s == Sense::Minimize ? "min" : "max"; }

std::string to_string(Parametrization p) {
  return p == Parametrization::Support ? "support" : "gauge";
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::MaxIters: return "max_iters";
    case RunStatus::Degenerate: return "degenerate";
    case RunStatus::LineSearchFailure: return "line_search_failure";
  }
  return "?";
}

Functional functional_from_string(const std::string& s) {
  if (s == "diam2mu") return Functional::DiameterSquaredMu;
  if (s == "perim2mu") return Functional::PerimeterSquaredMu;
  if (s == "areamu") return Functional::AreaMu;
  throw ConfigError("unknown objective '" + s + "' (diam2mu, perim2mu, areamu)");
}

Sense sense_from_string(const std::string& s) {
  if (s == "min") return Sense::Minimize;
  if (s == "max") return Sense::Maximize;
  throw ConfigError("unknown sense '" + s + "' (min, max)");
}

Parametrization parametrization_from_string(const std::string& s) {
  if (s == "support") return Parametrization::Support;
  if (s == "gauge") return Parametrization::Gauge;
  throw ConfigError("unknown parametrization '" + s + "' (support, gauge)");
}

void Problem::validate() const {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (parametrization == Parametrization::Support && (n < 8 || n % 2)) {
    throw ConfigError("support parametrization needs an even N >= 8");
  }
  if (parametrization == Parametrization::Gauge && n < 3) {
    throw ConfigError("gauge parametrization needs N >= 3");
  }
  if (!initial.empty() && static_cast<int>(initial.size()) != n) {
    throw ConfigError("initial parameters must have N entries");
  }
  if (!(init_noise >= 0.0)) throw ConfigError("init_noise must be nonnegative");
  if (!(init_harmonics >= 0.0)) throw ConfigError("init_harmonics must be nonnegative");
}

LinearConstraints problem_constraints(const Problem& p, double gamma_min) {
  if (p.parametrization == Parametrization::Gauge) return gauge_constraints(p.n, gamma_min);
  if (p.functional == Functional::DiameterSquaredMu) {
    return support_constraints(p.n, WidthBounds::fixed_diameter(p.n, 1.0));
  }
  return support_constraints(p.n);
}

namespace {

using Clock = std::chrono::steady_clock;

bool fixed_diameter(const Problem& p) {
  return p.parametrization == Parametrization::Support &&
         p.functional == Functional::DiameterSquaredMu;
}

ConvexPolygon make_polygon(const Problem& p, const Eigen::VectorXd& x) {
  std::vector<double> v(x.data(), x.data() + x.size());
  if (p.parametrization == Parametrization::Support) {
    return polygon_from_support(SupportVector(std::move(v)), 1e-9);
  }
  return polygon_from_gauge(GaugeVector(std::move(v)), 1e-9);
}

VertexJacobian make_jacobian(const Problem& p, const Eigen::VectorXd& x) {
  std::vector<double> v(x.data(), x.data() + x.size());
  if (p.parametrization == Parametrization::Support) return support_jacobian(SupportVector(v));
  return gauge_jacobian(GaugeVector(v));
}

std::vector<Point> area_forces(const std::vector<Point>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<Point> F(n);
  for (int a = 0; a < n; ++a) {
    const Point& nx = v[wrap_index(a + 1, n)];
    const Point& pv = v[wrap_index(a - 1, n)];
    F[a] = 0.5 * Point(nx.y() - pv.y(), pv.x() - nx.x());
  }
  return F;
}

// Normalization q (D, P or |K|), its exponent in J and its vertex forces.
struct Normalization {
  double q = 1.0;
  int power = 2;
  std::vector<Point> forces;
};

Normalization normalization(const Problem& p, const ConvexPolygon& poly) {
  Normalization nz;
  switch (p.functional) {
    case Functional::DiameterSquaredMu:
      if (fixed_diameter(p)) {
        // widths <= 1 with width 0 == 1 pin the discrete diameter
        nz.q = 1.0;
        nz.forces.assign(poly.size(), Point::Zero());
      } else {
        nz.q = diameter(poly);
        nz.forces = diameter_forces(poly);
      }
      break;
    case Functional::PerimeterSquaredMu:
      nz.q = perimeter(poly);
      nz.forces = perimeter_forces(poly.vertices);
      break;
    case Functional::AreaMu:
      nz.q = area(poly);
      nz.power = 1;
      nz.forces = area_forces(poly.vertices);
      break;
  }
  return nz;
}

struct Evaluation {
  bool ok = false;
  std::string failure;
  ConvexPolygon poly;
  double diam = 0.0;
  double J = 0.0;
  double mu_k = 0.0;
  Eigen::VectorXd grad;
  std::vector<double> mu;
  bool surrogate_active = false;
};

class Evaluator {
 public:
  Evaluator(const Problem& p, const SolveOptions& o) : p_(p), o_(o) {}

  // beta_abs: surrogate sharpness in absolute units (fixed for a run so
  // objective values stay comparable).
  Evaluation operator()(const Eigen::VectorXd& x, double beta_abs, double mu_hint, double h_rel,
                        bool want_grad) const {
    Evaluation ev;
    try {
      ev.poly = make_polygon(p_, x);
    } catch (const NonConvexParameters& e) {
      ev.failure = e.what();
      return ev;
    }
    ev.diam = diameter(ev.poly);
    double h = h_rel * ev.diam;
    if (mu_hint > 0.0) {
      h = std::min(h, 2.0 * std::numbers::pi / std::sqrt(mu_hint) / o_.elements_per_wavelength);
    }
    const int count = p_.k + 4;
    try {
      const TriMesh mesh = mesh_polygon(ev.poly, h);
      FemSpace space(mesh, o_.element);
      const FemMatrices mats = assemble(space);
      const Spectrum s = eigs(mats, count, ev.diam);
      ev.mu = s.mu;
      ev.mu_k = s.mu[p_.k];
      const double beta = beta_abs > 0.0 ? beta_abs : o_.beta / ev.mu_k;

      // smooth max (minimize) or min (maximize) over the eigenvalues that
      // may coalesce with mu_k from the side the optimizer pushes towards
      std::vector<int> idx;
      const double win = o_.surrogate_window * ev.mu_k;
      if (p_.sense == Sense::Minimize) {
        for (int i = 1; i <= p_.k; ++i) {
          if (s.mu[i] >= ev.mu_k - win) idx.push_back(i);
        }
      } else {
        for (int i = p_.k; i < s.size(); ++i) {
          if (s.mu[i] <= ev.mu_k + win) idx.push_back(i);
        }
      }
      const double sign = p_.sense == Sense::Minimize ? 1.0 : -1.0;
      double ref = -std::numeric_limits<double>::infinity();
      for (int i : idx) ref = std::max(ref, sign * s.mu[i]);
      double z = 0.0;
      std::vector<double> w(idx.size());
      for (std::size_t c = 0; c < idx.size(); ++c) {
        w[c] = std::exp(beta * (sign * s.mu[idx[c]] - ref));
        z += w[c];
      }
      for (double& v : w) v /= z;
      const double S = sign * (ref + std::log(z) / beta);
      for (std::size_t c = 0; c < idx.size(); ++c) {
        if (idx[c] != p_.k && w[c] > 1e-3) ev.surrogate_active = true;
      }

      const Normalization nz = normalization(p_, ev.poly);
      const double qp = std::pow(nz.q, nz.power);
      ev.J = qp * S;
      if (want_grad) {
        const VertexJacobian jac = make_jacobian(p_, x);
        Eigen::VectorXd gS = Eigen::VectorXd::Zero(x.size());
        for (std::size_t c = 0; c < idx.size(); ++c) {
          if (w[c] < 1e-12) continue;
          const auto forces = o_.volume_gradient ? discrete_vertex_forces(space, s, idx[c])
                                                 : vertex_forces(boundary_density_unchecked(space, s, idx[c]));
          gS += w[c] * pull_back(forces, jac);
        }
        const Eigen::VectorXd gq = pull_back(nz.forces, jac);
        ev.grad = qp * gS + nz.power * std::pow(nz.q, nz.power - 1) * S * gq;
      }
      ev.ok = std::isfinite(ev.J);
      if (!ev.ok) ev.failure = "non-finite objective";
    } catch (const Error& e) {
      ev.failure = e.what();
      ev.ok = false;
    }
    return ev;
  }

 private:
  const Problem& p_;
  const SolveOptions& o_;
};

double norm_of(const ConvexPolygon& poly, Functional f) {
  switch (f) {
    case Functional::DiameterSquaredMu: return diameter(poly);
    case Functional::PerimeterSquaredMu: return perimeter(poly);
    case Functional::AreaMu: return area(poly);
  }
  return 1.0;
}

// Rescale parameters so the normalization quantity equals 1; returns the
// factor c with x -> c x.
double rescale_factor(const Problem& p, const ConvexPolygon& poly) {
  if (fixed_diameter(p)) return 1.0;
  double q = norm_of(poly, p.functional);
  if (p.functional == Functional::AreaMu) q = std::sqrt(q);
  // support samples scale with the body, gauge samples inversely
  return p.parametrization == Parametrization::Support ? 1.0 / q : q;
}

// Distance from c along direction theta to the boundary of a convex polygon
// containing c.
double ray_distance(const ConvexPolygon& poly, const Point& c, double theta) {
  const Point d(std::cos(theta), std::sin(theta));
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < poly.size(); ++i) {
    const Point a = poly.vertex(i) - c, b = poly.vertex(i + 1) - c;
    const Point e = b - a;
    const double den = d.x() * e.y() - d.y() * e.x();
    if (std::abs(den) < 1e-300) continue;
    const double t = (a.x() * e.y() - a.y() * e.x()) / den;
    const double s = (a.x() * d.y() - a.y() * d.x()) / den;
    if (t > 0.0 && s >= -1e-12 && s <= 1.0 + 1e-12) best = std::min(best, t);
  }
  return best;
}

double distance_to_boundary(const ConvexPolygon& poly, const Point& c) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < poly.size(); ++i) {
    const Point a = poly.vertex(i), b = poly.vertex(i + 1);
    const Point e = b - a;
    const double len = e.norm();
    if (len == 0.0) continue;
    best = std::min(best, std::abs((c - a).x() * e.y() - (c - a).y() * e.x()) / len);
  }
  return best;
}

Saturation saturation(const Problem& p, const Eigen::VectorXd& x, const ConvexPolygon& poly,
                      double tol) {
  Saturation sat;
  const int n = p.n;
  sat.corner.assign(n, false);
  sat.diametral.assign(n, false);
  std::vector<double> v(x.data(), x.data() + n);
  const double D = diameter(poly);
  if (p.parametrization == Parametrization::Support) {
    const auto rho = curvature_radii(SupportVector(v));
    for (int i = 0; i < n; ++i) sat.corner[i] = rho[i] <= tol * D;
  } else {
    const auto conv = gauge_convexity(GaugeVector(v));
    double mean = 0.0;
    for (double g : v) mean += g / n;
    for (int i = 0; i < n; ++i) sat.corner[i] = conv[i] <= tol * mean;
  }
  if (fixed_diameter(p)) {
    const int half = n / 2;
    for (int i = 0; i < n; ++i) sat.diametral[i] = v[i] + v[(i + half) % n] >= 1.0 - tol;
  } else {
    for (int i = 0; i < n; ++i) {
      double far = 0.0;
      for (int j = 0; j < n; ++j) far = std::max(far, (poly.vertices[i] - poly.vertices[j]).norm());
      sat.diametral[i] = far >= D * (1.0 - tol);
    }
  }
  int free = 0;
  for (int i = 0; i < n; ++i) free += !(sat.corner[i] || sat.diametral[i]);
  sat.unflagged_fraction = static_cast<double>(free) / n;
  return sat;
}

}  // namespace

double functional_value(Functional f, const ConvexPolygon& poly, double mu_k) {
  const double q = norm_of(poly, f);
  return f == Functional::AreaMu ? q * mu_k : q * q * mu_k;
}

std::vector<double> initial_parameters(const Problem& p, const SolveOptions& opts) {
  p.validate();
  Eigen::VectorXd y(p.n);
  if (!p.initial.empty()) {
    for (int i = 0; i < p.n; ++i) y[i] = p.initial[i];
  } else {
    // disk samples: unit-diameter disk for the diameter problem, unit disk
    // otherwise; noise relative to the radius
    const double radius = fixed_diameter(p) ? 0.5 : 1.0;
    std::mt19937 rng(p.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double a[7] = {}, b[7] = {};
    for (int m = 2; m <= 6; ++m) {
      a[m] = p.init_harmonics * u(rng) / m;
      b[m] = p.init_harmonics * u(rng) / m;
    }
    for (int i = 0; i < p.n; ++i) {
      const double th = 2.0 * std::numbers::pi * i / p.n;
      double r = 1.0;
      for (int m = 2; m <= 6; ++m) r += a[m] * std::cos(m * th) + b[m] * std::sin(m * th);
      y[i] = radius * (r + p.init_noise * u(rng));
    }
    if (p.parametrization == Parametrization::Gauge) y = y.cwiseInverse();
  }
  double gamma_min = 0.0;
  if (p.parametrization == Parametrization::Gauge) gamma_min = opts.gamma_min_rel * y.mean();
  try {
    const auto r = project_feasible(y, problem_constraints(p, gamma_min));
    return std::vector<double>(r.x.data(), r.x.data() + r.x.size());
  } catch (const EmptyFeasibleSet& e) {
    throw InfeasibleStart(e.what());
  }
}

RunRecord solve(const Problem& problem, const SolveOptions& opts) {
  const auto t_start = Clock::now();
  problem.validate();
  RunRecord rec;
  rec.config = {{"problem", problem_json(problem)}, {"options", options_json(opts)}};

  const std::vector<double> x0v = initial_parameters(problem, opts);
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x0v.data(), x0v.size());
  const double gamma_min_abs =
      problem.parametrization == Parametrization::Gauge ? opts.gamma_min_rel * x.mean() : 0.0;
  LinearConstraints cons = problem_constraints(problem, gamma_min_abs);
  Evaluator eval(problem, opts);
  const double sign = problem.sense == Sense::Minimize ? 1.0 : -1.0;

  // bring the start to the normalization so objective values and the
  // surrogate scale are comparable across runs
  auto rescale = [&](Eigen::VectorXd& v) {
    try {
      const double c = rescale_factor(problem, make_polygon(problem, v));
      if (c != 1.0) {
        v *= c;
        if (problem.parametrization == Parametrization::Gauge) {
          cons = problem_constraints(problem, gamma_min_abs * c);
        }
      }
      return c;
    } catch (const NonConvexParameters& e) {
      throw InfeasibleStart(e.what());
    }
  };
  double gamma_scale = 1.0;
  gamma_scale *= rescale(x);

  Evaluation cur = eval(x, 0.0, 0.0, opts.h_rel, true);
  if (!cur.ok) throw InfeasibleStart("cannot evaluate the starting shape: " + cur.failure);
  // the surrogate sharpness grows in stages from beta_start to beta; each
  // stage runs until it converges, stalls or the line search gives up
  double beta_stage = std::min(opts.beta_start, opts.beta);
  double beta_abs = beta_stage / cur.mu_k;
  cur = eval(x, beta_abs, cur.mu_k, opts.h_rel, true);
  if (!cur.ok) throw InfeasibleStart("cannot evaluate the starting shape: " + cur.failure);

  // x is feasible whenever a projection is requested
  auto project = [&](const Eigen::VectorXd& y) { return project_feasible(y, cons, {}, &x).x; };

  std::deque<double> history{sign * cur.J};
  double best = sign * cur.J;
  std::deque<double> best_hist{best};
  const double gmax = cur.grad.cwiseAbs().maxCoeff();
  double alpha = gmax > 0.0 ? 0.01 * x.cwiseAbs().maxCoeff() / gmax : 1.0;
  int evaluations = 2;
  rec.status = RunStatus::MaxIters;
  auto next_stage = [&]() {
    if (beta_stage >= opts.beta) return false;
    beta_stage = std::min(beta_stage * opts.beta_growth, opts.beta);
    Evaluation re = eval(x, beta_stage / cur.mu_k, cur.mu_k, opts.h_rel, true);
    ++evaluations;
    if (!re.ok) return false;
    beta_abs = beta_stage / cur.mu_k;
    cur = std::move(re);
    history.assign(1, sign * cur.J);
    best = sign * cur.J;
    best_hist.assign(1, best);
    rec.status = RunStatus::MaxIters;
    rec.message.clear();
    return true;
  };

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    const Eigen::VectorXd G = sign * cur.grad;
    const double F = sign * cur.J;

    IterationLog log;
    log.iter = iter;
    log.objective = cur.J;
    log.mu_k = cur.mu_k;
    log.infeasibility = cons.max_violation(x);
    log.surrogate_active = cur.surrogate_active;
    rec.surrogate_used = rec.surrogate_used || cur.surrogate_active;

    // projected gradient step of length alpha; a step that is too short to
    // leave the current face is lengthened a few times
    Eigen::VectorXd d = project(x - alpha * G) - x;
    double gd = G.dot(d);
    for (int grow = 0; grow < 4 && !(gd < 0.0); ++grow) {
      alpha *= 10.0;
      d = project(x - alpha * G) - x;
      gd = G.dot(d);
    }
    log.pg_norm = d.norm() / alpha;
    const double xscale = x.cwiseAbs().maxCoeff();
    if (log.pg_norm * xscale <= opts.tol_opt * std::abs(cur.J)) {
      rec.status = RunStatus::Converged;
      rec.message = "projected gradient below tolerance";
      log.evaluations = evaluations;
      rec.trace.push_back(log);
      if (opts.on_iteration) opts.on_iteration(log);
      if (next_stage()) continue;
      break;
    }
    if (cur.diam / std::max(minimal_width(cur.poly), 1e-300) > opts.aspect_ratio_guard) {
      rec.status = RunStatus::Degenerate;
      rec.message = "aspect ratio exceeded the guard";
      log.evaluations = evaluations;
      rec.trace.push_back(log);
      if (opts.on_iteration) opts.on_iteration(log);
      break;
    }
    if (!(gd < -1e-14 * std::abs(F))) {
      rec.status = RunStatus::Converged;
      rec.message = "no descent direction";
      log.evaluations = evaluations;
      rec.trace.push_back(log);
      if (opts.on_iteration) opts.on_iteration(log);
      if (next_stage()) continue;
      break;
    }
    const double fref = *std::max_element(history.begin(), history.end());
    double t = 1.0;
    Evaluation next;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      next = eval(x + t * d, beta_abs, cur.mu_k, opts.h_rel, true);
      ++evaluations;
      if (next.ok) {
        const double Fn = sign * next.J;
        if (Fn <= fref + opts.armijo * t * gd) {
          accepted = true;
          break;
        }
        // safeguarded quadratic model along the segment
        const double denom = 2.0 * (Fn - F - t * gd);
        double tn = denom > 0.0 ? -gd * t * t / denom : 0.5 * t;
        t = std::clamp(tn, 0.1 * t, 0.5 * t);
      } else {
        t *= 0.25;
      }
    }
    if (!accepted) {
      rec.status = RunStatus::LineSearchFailure;
      rec.message = "no acceptable step after backtracking";
      log.evaluations = evaluations;
      rec.trace.push_back(log);
      if (opts.on_iteration) opts.on_iteration(log);
      if (next_stage()) continue;
      break;
    }

    const Eigen::VectorXd s = t * d;
    const Eigen::VectorXd yv = sign * next.grad - G;
    const double sy = s.dot(yv);
    const double amax = 1e6 * alpha + 1.0;
    alpha = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, amax) : std::min(10.0 * alpha, amax);
    log.step = s.norm();
    x += s;
    cur = std::move(next);

    // keep the scale fixed; the objective is invariant
    const double c = rescale_factor(problem, cur.poly);
    if (std::abs(c - 1.0) > 1e-3) {
      x *= c;
      cur.grad /= c;
      alpha *= c * c;
      if (problem.parametrization == Parametrization::Gauge) {
        gamma_scale *= c;
        cons = problem_constraints(problem, gamma_min_abs * gamma_scale);
      }
      cur.poly = make_polygon(problem, x);
      cur.diam = diameter(cur.poly);
    }

    // gauge samples degrade when the origin drifts towards the boundary
    if (problem.parametrization == Parametrization::Gauge) {
      const Point cen = centroid(cur.poly);
      if (cen.norm() > 0.3 * distance_to_boundary(cur.poly, Point::Zero())) {
        Eigen::VectorXd g(problem.n);
        for (int i = 0; i < problem.n; ++i) {
          g[i] = 1.0 / ray_distance(cur.poly, cen, 2.0 * std::numbers::pi * i / problem.n);
        }
        x = project(g);
        Evaluation re = eval(x, beta_abs, cur.mu_k, opts.h_rel, true);
        ++evaluations;
        if (re.ok) {
          cur = std::move(re);
          ++rec.recenterings;
          history.clear();
          const double gm = cur.grad.cwiseAbs().maxCoeff();
          alpha = gm > 0.0 ? 0.01 * x.cwiseAbs().maxCoeff() / gm : alpha;
        }
      }
    }

    history.push_back(sign * cur.J);
    while (static_cast<int>(history.size()) > opts.nonmonotone_memory) history.pop_front();
    best = std::min(best, sign * cur.J);
    best_hist.push_back(best);
    log.evaluations = evaluations;
    rec.trace.push_back(log);
    if (opts.on_iteration) opts.on_iteration(log);

    if (static_cast<int>(best_hist.size()) > opts.stall_window) {
      const double old = best_hist[best_hist.size() - 1 - opts.stall_window];
      if (old - best <= opts.stall_rel * std::abs(best)) {
        rec.status = RunStatus::Converged;
        rec.message = "objective stalled";
        if (next_stage()) continue;
        break;
      }
    }
  }

  // final evaluation on a finer mesh with the true mu_k
  const Evaluation fin = eval(x, beta_abs, cur.mu_k, opts.final_h_rel, false);
  const Evaluation& use = fin.ok ? fin : cur;
  rec.params.assign(x.data(), x.data() + x.size());
  rec.shape = use.poly;
  rec.diameter = diameter(use.poly);
  rec.perimeter = perimeter(use.poly);
  rec.area = area(use.poly);
  rec.mu = use.mu;
  rec.clusters = cluster(use.mu, opts.cluster_tol);
  rec.objective = functional_value(problem.functional, use.poly, use.mu[problem.k]);
  if (fin.ok) {
    // residuals come from a fresh solve of the final mesh
    const double D = rec.diameter;
    double h = opts.final_h_rel * D;
    h = std::min(h, 2.0 * std::numbers::pi / std::sqrt(use.mu[problem.k]) /
                        opts.elements_per_wavelength);
    const auto s = neumann_spectrum(mesh_polygon(use.poly, h), problem.k + 4, opts.element);
    rec.residuals = s.residuals;
  }
  rec.saturation = saturation(problem, x, rec.shape, opts.saturation_tol);
  rec.wall_seconds = std::chrono::duration<double>(Clock::now() - t_start).count();
  return rec;
}

MultistartResult multistart(const Problem& problem, int n_starts, unsigned seed,
                            const SolveOptions& opts, int threads,
                            const std::function<bool(const RunRecord&)>& enough) {
  if (n_starts < 1) throw ConfigError("n_starts must be at least 1");
  MultistartResult out;
  out.runs.resize(n_starts);
  std::vector<char> ok(n_starts, 0), started(n_starts, 0);
  std::atomic<int> next{0};
  std::atomic<bool> done{false};
  std::mutex err_mutex;
  auto worker = [&]() {
    for (int s = next++; s < n_starts && !done; s = next++) {
      started[s] = 1;
      Problem p = problem;
      p.seed = seed + static_cast<unsigned>(s);
      if (s % 2 == 1 && p.init_harmonics == 0.0) p.init_harmonics = 0.3;
      try {
        out.runs[s] = solve(p, opts);
        ok[s] = 1;
        if (enough && enough(out.runs[s])) done = true;
      } catch (const Error& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        out.runs[s].config = {{"problem", problem_json(p)}, {"options", options_json(opts)}};
        out.runs[s].status = RunStatus::Degenerate;
        out.runs[s].message = e.what();
        out.runs[s].objective = std::numeric_limits<double>::quiet_NaN();
      }
    }
  };
  const int nt = std::clamp(threads, 1, n_starts);
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (enough) {
    int kept = 0;
    for (int s = 0; s < n_starts; ++s) {
      if (!started[s]) continue;
      if (kept != s) out.runs[kept] = std::move(out.runs[s]);
      ok[kept++] = ok[s];
    }
    out.runs.resize(kept);
    n_starts = kept;
  }

  const double sign = problem.sense == Sense::Minimize ? 1.0 : -1.0;
  for (int s = 0; s < n_starts; ++s) {
    if (!ok[s] || !std::isfinite(out.runs[s].objective)) continue;
    if (out.best < 0 || sign * out.runs[s].objective < sign * out.runs[out.best].objective) {
      out.best = s;
    }
  }
  if (out.best < 0) out.best = 0;
  return out;
}

nlohmann::json problem_json(const Problem& p) {
  return {{"k", p.k},
          {"sense", to_string(p.sense)},
          {"objective", to_string(p.functional)},
          {"parametrization", to_string(p.parametrization)},
          {"N", p.n},
          {"init_noise", p.init_noise},
          {"init_harmonics", p.init_harmonics},
          {"seed", p.seed},
          {"initial", p.initial}};
}

nlohmann::json options_json(const SolveOptions& o) {
  return {{"max_iters", o.max_iters},
          {"tol_opt", o.tol_opt},
          {"stall_rel", o.stall_rel},
          {"stall_window", o.stall_window},
          {"h_rel", o.h_rel},
          {"elements_per_wavelength", o.elements_per_wavelength},
          {"final_h_rel", o.final_h_rel},
          {"element", o.element == Element::P2 ? "P2" : "P1"},
          {"cluster_tol", o.cluster_tol},
          {"beta", o.beta},
          {"beta_start", o.beta_start},
          {"beta_growth", o.beta_growth},
          {"surrogate_window", o.surrogate_window},
          {"volume_gradient", o.volume_gradient},
          {"armijo", o.armijo},
          {"nonmonotone_memory", o.nonmonotone_memory},
          {"max_backtracks", o.max_backtracks},
          {"aspect_ratio_guard", o.aspect_ratio_guard},
          {"saturation_tol", o.saturation_tol},
          {"gamma_min_rel", o.gamma_min_rel}};
}

nlohmann::json run_json(const RunRecord& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"iter", t.iter},
                     {"objective", t.objective},
                     {"mu_k", t.mu_k},
                     {"infeasibility", t.infeasibility},
                     {"pg_norm", t.pg_norm},
                     {"step", t.step},
                     {"surrogate_active", t.surrogate_active},
                     {"evaluations", t.evaluations}});
  }
  nlohmann::json verts = nlohmann::json::array();
  for (const auto& v : r.shape.vertices) verts.push_back({v.x(), v.y()});
  std::vector<int> corner(r.saturation.corner.begin(), r.saturation.corner.end());
  std::vector<int> diam(r.saturation.diametral.begin(), r.saturation.diametral.end());
  return {{"schema_version", "1.0"},
          {"config", r.config},
          {"status", to_string(r.status)},
          {"message", r.message},
          {"objective", r.objective},
          {"diameter", r.diameter},
          {"perimeter", r.perimeter},
          {"area", r.area},
          {"mu", r.mu},
          {"residuals", r.residuals},
          {"clusters", r.clusters},
          {"params", r.params},
          {"vertices", verts},
          {"surrogate_used", r.surrogate_used},
          {"recenterings", r.recenterings},
          {"saturation",
           {{"corner", corner}, {"diametral", diam}, {"unflagged_fraction", r.saturation.unflagged_fraction}}},
          {"wall_seconds", r.wall_seconds},
          {"trace", trace}};
}

}  // namespace cneumann
