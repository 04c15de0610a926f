#include "cneumann/verify.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "cneumann/bessel.hpp"
#include "cneumann/errors.hpp"
#include "cneumann/geometry.hpp"
#include "cneumann/mesh.hpp"
#include "cneumann/sensitivity.hpp"
#include "cneumann/theory.hpp"

namespace cneumann {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

// Smooth body with support (or gauge) samples base + harmonics 1..4; the
// amplitudes keep base + f + f'' > 0, so the samples are strictly convex.
std::vector<double> random_smooth_samples(std::mt19937& rng, int n, double base) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double a[5] = {}, b[5] = {};
  a[1] = 0.1 * base * u(rng);
  b[1] = 0.1 * base * u(rng);
  for (int m = 2; m <= 4; ++m) {
    const double amp = 0.25 * base / (m * m - 1);
    a[m] = amp * u(rng);
    b[m] = amp * u(rng);
  }
  std::vector<double> q(n);
  for (int i = 0; i < n; ++i) {
    const double th = 2 * kPi * i / n;
    q[i] = base;
    for (int m = 1; m <= 4; ++m) q[i] += a[m] * std::cos(m * th) + b[m] * std::sin(m * th);
  }
  return q;
}

// First k in 1..4 whose eigenvalue is simple with a clear gap on both sides.
int well_separated_index(const Spectrum& s) {
  for (int k = 1; k <= 4 && k + 1 < s.size(); ++k) {
    const double gap = std::min(s.mu[k] - s.mu[k - 1], s.mu[k + 1] - s.mu[k]);
    if (gap > 0.02 * s.mu[k]) return k;
  }
  return 0;
}

ConvexPolygon support_polygon(const FourierPerturbation& f, double eps, int n) {
  std::vector<double> p(n);
  for (int i = 0; i < n; ++i) p[i] = 1.0 + eps * f(2 * kPi * i / n);
  return polygon_from_support(SupportVector(std::move(p)));
}

// Index of a simple disk eigenvalue in mu_0, mu_1, ... counted with multiplicity.
int disk_index(double omega0) {
  const auto mu = disk_eigenvalues(64);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (std::abs(mu[i] - omega0 * omega0) < 1e-9 * mu[i]) return static_cast<int>(i) + 1;
  }
  throw ConfigError("eigenvalue not among the first 64 of the disk");
}

VerifyCheck check(std::string name, bool pass, std::string detail) {
  return VerifyCheck{std::move(name), pass, std::move(detail)};
}

}  // namespace

double AnalyticRow::rel_error() const { return std::abs(computed - exact) / exact; }

std::vector<AnalyticRow> analytic_spectra(double target_h, Element element) {
  std::vector<AnalyticRow> rows;
  const double pi2 = kPi * kPi;
  {
    const auto s = neumann_spectrum(mesh_polygon(make_rectangle(1, 1), target_h), 4, element);
    rows.push_back({"unit square", 1, s.mu[1], pi2});
    rows.push_back({"unit square", 2, s.mu[2], pi2});
    rows.push_back({"unit square", 3, s.mu[3], 2 * pi2});
  }
  for (int k = 2; k <= 5; ++k) {
    const auto s = neumann_spectrum(mesh_polygon(make_rectangle(k, 1), target_h), k + 2, element);
    rows.push_back({"rectangle " + std::to_string(k) + "x1", k, s.mu[k], pi2});
  }
  {
    const auto exact = disk_eigenvalues(9);
    const auto s = neumann_spectrum(mesh_polygon(make_regular_polygon(256, 1.0), target_h), 11, element);
    for (int k = 1; k <= 9; ++k) rows.push_back({"256-gon", k, s.mu[k], exact[k - 1]});
  }
  return rows;
}

double GradientStudy::agree_fraction() const {
  int total = 0, ok = 0;
  for (const auto& s : shapes) {
    total += s.coordinates;
    ok += s.agreeing;
  }
  return total ? static_cast<double>(ok) / total : 0.0;
}

GradientStudy support_gradient_study(int shapes, int n, unsigned seed, double target_h, double delta,
                                     double rel_tol) {
  GradientStudy study;
  std::mt19937 rng(seed);
  int attempts = 0;
  while (static_cast<int>(study.shapes.size()) < shapes) {
    if (++attempts > 10 * shapes) throw SolverNoConvergence("no random body with a simple eigenvalue");
    const auto p = random_smooth_samples(rng, n, 0.5);
    const SupportVector sv(p);
    const auto mesh = mesh_polygon(polygon_from_support(sv), target_h);
    const FemSpace space(mesh, Element::P2);
    const auto s = neumann_spectrum(mesh, 6);
    const int k = well_separated_index(s);
    if (k == 0) continue;
    const auto jac = support_jacobian(sv);
    const Eigen::VectorXd g = pull_back(discrete_vertex_forces(space, s, k), jac);
    const Eigen::VectorXd gb = pull_back(vertex_forces(boundary_density(space, s, k)), jac);
    GradientSample out;
    out.k = k;
    out.mu = s.mu[k];
    out.coordinates = n;
    const double scale = g.cwiseAbs().maxCoeff();
    for (int j = 0; j < n; ++j) {
      out.euler += p[j] * g[j];
      auto pp = p, pm = p;
      pp[j] += delta;
      pm[j] -= delta;
      const auto mp = deform(mesh, polygon_from_support(SupportVector(pp)).vertices);
      const auto mm = deform(mesh, polygon_from_support(SupportVector(pm)).vertices);
      const double fd =
          (neumann_spectrum(mp, k + 1).mu[k] - neumann_spectrum(mm, k + 1).mu[k]) / (2 * delta);
      const double err = std::abs(fd - g[j]);
      const double ref = std::max(std::abs(fd), std::abs(g[j]));
      if (err <= rel_tol * ref) ++out.agreeing;
      if (std::abs(fd - gb[j]) <= rel_tol * std::max(std::abs(fd), std::abs(gb[j]))) ++out.boundary_agreeing;
      out.max_rel_error = std::max(out.max_rel_error, err / std::max(ref, 1e-3 * scale));
    }
    study.shapes.push_back(out);
  }
  return study;
}

GradientStudy gauge_euler_study(int shapes, int n, unsigned seed, double target_h) {
  GradientStudy study;
  std::mt19937 rng(seed);
  int attempts = 0;
  while (static_cast<int>(study.shapes.size()) < shapes) {
    if (++attempts > 10 * shapes) throw SolverNoConvergence("no random body with a simple eigenvalue");
    const auto gamma = random_smooth_samples(rng, n, 2.0);
    const GaugeVector gv(gamma);
    const auto mesh = mesh_polygon(polygon_from_gauge(gv), target_h);
    const FemSpace space(mesh, Element::P2);
    const auto s = neumann_spectrum(mesh, 6);
    const int k = well_separated_index(s);
    if (k == 0) continue;
    const Eigen::VectorXd g = pull_back(discrete_vertex_forces(space, s, k), gauge_jacobian(gv));
    GradientSample out;
    out.k = k;
    out.mu = s.mu[k];
    for (int j = 0; j < n; ++j) out.euler += gamma[j] * g[j];
    study.shapes.push_back(out);
  }
  return study;
}

double Lambda1Study::rel_error() const { return std::abs(extrapolated - formula) / std::abs(formula); }

Lambda1Study disk_lambda1_study(int n, double target_h) {
  Lambda1Study st;
  FourierPerturbation f;
  f.alpha0 = 0.2;
  f.alpha[2] = 1.0;
  f.beta[2] = 0.5;
  const double w = jprime_zero(st.m, st.l).value;
  st.formula = lambda1(st.m, w, f);
  const auto base = mesh_polygon(support_polygon(f, 0.0, n), target_h);
  auto mu1 = [&](double eps) {
    return neumann_spectrum(deform(base, support_polygon(f, eps, n).vertices), 3).mu[1];
  };
  const double m0 = mu1(0.0);
  st.eps = {0.008, 0.004, 0.002, 0.001};
  for (double e : st.eps) st.quotients.push_back((mu1(e) - m0) / e);
  // q(eps) = lambda1 + c eps + O(eps^2)
  st.extrapolated = 2.0 * st.quotients[3] - st.quotients[2];
  return st;
}

double Omega2Study::rel_error() const { return std::abs(fitted - formula) / std::abs(formula); }

Omega2Study disk_omega2_study(int l, int n, double target_h) {
  Omega2Study st;
  st.l = l;
  FourierPerturbation f;
  f.alpha[3] = 1.0;
  f.beta[3] = 1.0;
  const SecondOrder so = omega2(l, f);
  st.formula = so.omega2;
  const int idx = disk_index(so.omega0);
  const auto base = mesh_polygon(support_polygon(f, 0.0, n), target_h);
  st.eps = {-0.02, -0.015, -0.01, -0.005, 0.0, 0.005, 0.01, 0.015, 0.02};
  Eigen::MatrixXd A(static_cast<Eigen::Index>(st.eps.size()), 3);
  Eigen::VectorXd b(A.rows());
  for (std::size_t i = 0; i < st.eps.size(); ++i) {
    const double e = st.eps[i];
    const auto mesh = e == 0.0 ? base : deform(base, support_polygon(f, e, n).vertices);
    const double r = std::sqrt(neumann_spectrum(mesh, idx + 2).mu[idx]);
    st.sqrt_mu.push_back(r);
    const auto row = static_cast<Eigen::Index>(i);
    A(row, 0) = 1.0;
    A(row, 1) = e * e;
    A(row, 2) = e * e * e * e;
    b[row] = r;
  }
  st.fitted = A.householderQr().solve(b)[1];
  return st;
}

std::vector<RatioSignRow> ratio_sign_table(int l_min, int l_max) {
  std::vector<RatioSignRow> rows;
  for (int l = l_min; l <= l_max; ++l) {
    RatioSignRow r;
    r.l = l;
    r.omega0 = jprime_zero(0, l).value;
    r.lhs = r.omega0 / 4.0 - bessel_j_prime(3, r.omega0) / bessel_j(3, r.omega0);
    r.rhs = r.omega0 * r.omega0 - 6.0;
    rows.push_back(r);
  }
  return rows;
}

std::vector<ThinRectangleRow> thin_rectangle_sequence(const std::vector<double>& eps) {
  std::vector<ThinRectangleRow> rows;
  for (double e : eps) {
    const auto rect = make_rectangle(1.0, e);
    const auto s = neumann_spectrum(mesh_polygon(rect, std::min(0.05, e / 4.0)), 3);
    const double D = diameter(rect), P = perimeter(rect);
    rows.push_back({e, D * D * s.mu[1], P * P * s.mu[1]});
  }
  return rows;
}

// ---------------------------------------------------------------------------

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.pass; });
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"analytic", "bessel", "disk",   "gradients",
                                              "sl",       "collapse", "theory", "inertia"};
  return names;
}

namespace {

SuiteReport analytic_suite() {
  SuiteReport rep;
  std::ostringstream t;
  t << "| shape | k | computed | exact | rel. error |\n|---|---|---|---|---|\n";
  for (const auto& r : analytic_spectra()) {
    t << "| " << r.shape << " | " << r.index << " | " << fmt(r.computed, 9) << " | " << fmt(r.exact, 9)
      << " | " << fmt(r.rel_error(), 3) << " |\n";
    rep.checks.push_back(check(r.shape + " mu_" + std::to_string(r.index), r.rel_error() <= 3e-3,
                               "rel. error " + fmt(r.rel_error(), 3)));
  }
  rep.tables = t.str();
  return rep;
}

SuiteReport bessel_suite() {
  SuiteReport rep;
  double worst = 0.0;
  for (int m = 0; m <= 8; ++m) {
    for (double x = 0.0; x <= 40.0; x += 0.173) {
      worst = std::max(worst, std::abs(bessel_j(m, x) - std::cyl_bessel_j(static_cast<double>(m), x)));
    }
  }
  rep.checks.push_back(check("J_m against std::cyl_bessel_j, m <= 8, x <= 40", worst < 1e-11,
                             "max abs. difference " + fmt(worst, 3)));
  // zeros of J_m' to ten digits from standard tables
  const struct {
    int m, l;
    double z;
  } table[] = {{1, 1, 1.8411837813}, {2, 1, 3.0542369282}, {0, 2, 3.8317059702},
               {3, 1, 4.2011889412}, {4, 1, 5.3175531260}, {1, 2, 5.3314427735},
               {5, 1, 6.4156163757}, {2, 2, 6.7061331942}, {0, 3, 7.0155866698}};
  double zworst = 0.0;
  for (const auto& e : table) zworst = std::max(zworst, std::abs(jprime_zero(e.m, e.l).value - e.z));
  rep.checks.push_back(check("zeros of J_m' against tables", zworst < 1e-9, "max abs. difference " + fmt(zworst, 3)));
  const auto mu = disk_eigenvalues(9);
  const double expected[] = {1.8411837813, 1.8411837813, 3.0542369282, 3.0542369282, 3.8317059702,
                             4.2011889412, 4.2011889412, 5.3175531260, 5.3175531260};
  double sworst = 0.0;
  for (int i = 0; i < 9; ++i) sworst = std::max(sworst, std::abs(mu[i] - expected[i] * expected[i]) / mu[i]);
  rep.checks.push_back(check("disk spectrum with multiplicities", sworst < 1e-9, "max rel. difference " + fmt(sworst, 3)));
  return rep;
}

SuiteReport disk_suite() {
  SuiteReport rep;
  std::ostringstream t;
  t << "| l | omega0 | omega0/4 - J3'/J3 | omega0^2 - 6 | signs agree |\n|---|---|---|---|---|\n";
  bool all = true;
  for (const auto& r : ratio_sign_table()) {
    t << "| " << r.l << " | " << fmt(r.omega0, 10) << " | " << fmt(r.lhs, 8) << " | " << fmt(r.rhs, 8) << " | "
      << (r.signs_agree() ? "yes" : "no") << " |\n";
    all = all && r.signs_agree();
  }
  rep.checks.push_back(check("sign table for l = 2..6", all, all ? "all rows agree" : "a row disagrees"));

  const auto l1 = disk_lambda1_study();
  t << "\nlambda1 for j'_{1,1}^2: formula " << fmt(l1.formula, 8) << ", difference quotients";
  for (std::size_t i = 0; i < l1.eps.size(); ++i) t << ' ' << fmt(l1.quotients[i], 8) << " (eps " << l1.eps[i] << ")";
  t << ", extrapolated " << fmt(l1.extrapolated, 8) << "\n";
  rep.checks.push_back(check("first-order coefficient of the double eigenvalue", l1.rel_error() <= 0.02,
                             "rel. error " + fmt(l1.rel_error(), 3)));

  const auto o2 = disk_omega2_study();
  t << "\nomega2 for j'_{0,2}^2 with alpha3 = beta3 = 1: formula " << fmt(o2.formula, 8) << ", fitted "
    << fmt(o2.fitted, 8) << "\n";
  rep.checks.push_back(check("second-order coefficient of the radial eigenvalue", o2.rel_error() <= 0.05,
                             "rel. error " + fmt(o2.rel_error(), 3)));
  rep.tables = t.str();
  return rep;
}

SuiteReport gradients_suite(unsigned seed) {
  SuiteReport rep;
  const auto sup = support_gradient_study(10, 64, seed);
  std::ostringstream t;
  t << "| body | k | mu_k | agreeing | boundary form agreeing | max rel. error | Euler sum / mu_k |\n"
    << "|---|---|---|---|---|---|---|\n";
  bool euler_ok = true;
  for (std::size_t i = 0; i < sup.shapes.size(); ++i) {
    const auto& s = sup.shapes[i];
    t << "| " << i << " | " << s.k << " | " << fmt(s.mu) << " | " << s.agreeing << "/" << s.coordinates << " | "
      << s.boundary_agreeing << "/" << s.coordinates << " | " << fmt(s.max_rel_error, 3) << " | " << fmt(s.euler / s.mu) << " |\n";
    euler_ok = euler_ok && std::abs(s.euler / s.mu + 2.0) <= 0.02;
  }
  rep.checks.push_back(check("support gradients agree with central differences on >= 95% of coordinates",
                             sup.agree_fraction() >= 0.95, "fraction " + fmt(sup.agree_fraction(), 4)));
  rep.checks.push_back(check("support Euler sums equal -2 mu_k within 1%", euler_ok, ""));
  const auto gau = gauge_euler_study(10, 64, seed + 1);
  double worst = 0.0;
  for (const auto& s : gau.shapes) worst = std::max(worst, std::abs(s.euler / (2.0 * s.mu) - 1.0));
  rep.checks.push_back(check("gauge Euler sums equal +2 mu_k within 1%", worst <= 0.01, "worst rel. error " + fmt(worst, 3)));
  rep.tables = t.str();
  return rep;
}

SuiteReport sl_suite(unsigned seed) {
  SuiteReport rep;
  const auto s = sl_eigs(Profile::sample([](double) { return 1.0; }, 2000), 5);
  double worst = 0.0;
  for (int k = 1; k <= 5; ++k) worst = std::max(worst, std::abs(s.mu[k] / std::pow(k * kPi, 2) - 1.0));
  rep.checks.push_back(check("constant weight gives (k pi)^2 for k <= 5", worst <= 1e-6, "max rel. error " + fmt(worst, 3)));

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::uniform_int_distribution<int> pieces(1, 6);
  int held = 0;
  double min_margin = 1e300;
  for (int t = 0; t < 50; ++t) {
    // minimum of affine functions nonnegative on [0, 1]
    std::vector<std::pair<double, double>> lines(pieces(rng));
    for (auto& [a, b] : lines) {
      a = u(rng);
      b = u(rng);
    }
    const auto prof = Profile::sample(
                          [&](double x) {
                            double v = 1e300;
                            for (auto [a, b] : lines) v = std::min(v, a + (b - a) * x);
                            return v;
                          },
                          1000)
                          .normalized();
    bool ok = true;
    for (const auto& row : sl_lower_bound_check(prof, 5)) {
      ok = ok && row.holds;
      min_margin = std::min(min_margin, row.margin);
    }
    held += ok;
  }
  rep.checks.push_back(check("random concave weights satisfy mu_k >= (k pi)^2", held == 50,
                             std::to_string(held) + "/50, smallest relative margin " + fmt(min_margin, 3)));

  const auto tent = sl_eigs(Profile::sample([](double x) { return 1.0 - std::abs(2 * x - 1); }, 1000), 6);
  bool nodal = true;
  for (int k = 1; k <= 6; ++k) nodal = nodal && tent.sign_changes(k) == k;
  rep.checks.push_back(check("k-th eigenfunction of the tent weight changes sign k times", nodal, ""));
  return rep;
}

SuiteReport collapse_suite(const VerifyOptions& opts) {
  SuiteReport rep;
  const Profile prof =
      opts.profile ? *opts.profile : Profile::sample([](double x) { return 1.0 - std::abs(2 * x - 1); }, 400);
  const auto table = collapse_experiment(prof, opts.k);
  std::ostringstream t;
  write_collapse_csv(t, table);
  rep.tables = "```\n" + t.str() + "```\n";
  double worst = 0.0;
  int computed = 0;
  for (const auto& r : table.rows) {
    if (r.skipped) continue;
    ++computed;
    worst = std::max(worst, std::abs(r.gap) / table.limit);
  }
  // a profile whose thin domains already have the limit spectrum has no trend to show
  const bool flat = worst <= 1e-3;
  rep.checks.push_back(check("thin-domain eigenvalues computed", computed > 0,
                             std::to_string(computed) + " of " + std::to_string(table.rows.size()) + " rows"));
  rep.checks.push_back(check("gap to the limit shrinks with eps", table.monotone || flat,
                             "limit " + fmt(table.limit, 8) + (flat ? ", gaps below 1e-3" : "")));
  return rep;
}

SuiteReport theory_suite() {
  SuiteReport rep;
  struct Shape {
    std::string id;
    ConvexPolygon poly;
    bool polya;
  };
  const double s3 = std::sqrt(3.0);
  ConvexPolygon tri;
  tri.vertices = {Point(0, 0), Point(1, 0), Point(0.5, 0.5 * s3)};
  const std::vector<Shape> shapes{{"square", make_rectangle(1, 1), true},
                                  {"disk (256-gon)", make_regular_polygon(256, 1.0), true},
                                  {"rectangle 2x1", make_rectangle(2, 1), true},
                                  {"equilateral triangle", tri, false},
                                  {"regular hexagon", make_regular_polygon(6, 1.0), false}};
  std::vector<BoundReport> reports;
  for (const auto& sh : shapes) {
    const double h = 0.03 * diameter(sh.poly);
    const auto s = neumann_spectrum(mesh_polygon(sh.poly, h), 8);
    auto r = bound_report(sh.id, sh.poly, s.mu, 1);
    if (sh.polya) {
      for (int k = 1; k < s.size(); ++k) r.checks.push_back(check_polya(sh.poly, s.mu, k, true));
    }
    rep.checks.push_back(check(sh.id + " passes the hard bounds", r.hard_pass(), ""));
    reports.push_back(std::move(r));
  }
  std::ostringstream t;
  write_bound_markdown(t, reports);

  const auto thin = thin_rectangle_sequence();
  t << "| eps | D^2 mu_1 | P^2 mu_1 |\n|---|---|---|\n";
  bool above = true, decreasing = true, bounded = true;
  for (std::size_t i = 0; i < thin.size(); ++i) {
    t << "| " << thin[i].eps << " | " << fmt(thin[i].d2mu1, 8) << " | " << fmt(thin[i].p2mu1, 8) << " |\n";
    above = above && thin[i].d2mu1 > kPi * kPi;
    if (i > 0) decreasing = decreasing && thin[i].d2mu1 < thin[i - 1].d2mu1;
    bounded = bounded && thin[i].p2mu1 <= 16 * kPi * kPi * (1 + 1e-3);
  }
  const double last = thin.back().d2mu1 / (kPi * kPi) - 1.0;
  rep.checks.push_back(check("thin rectangles: D^2 mu_1 decreases to pi^2 from above", above && decreasing && last < 1e-3,
                             "last excess " + fmt(last, 3)));
  rep.checks.push_back(check("thin rectangles: P^2 mu_1 stays below 16 pi^2", bounded, ""));
  rep.tables = t.str();
  return rep;
}

SuiteReport inertia_suite(unsigned seed) {
  SuiteReport rep;
  const auto r = inertia_ratio_check(1.0, 200, 10000, seed);
  rep.checks.push_back(check("linear profile attains 3R^2/10", std::abs(r.linear_ratio - r.target) < 1e-12,
                             "ratio " + fmt(r.linear_ratio, 15)));
  rep.checks.push_back(check("no random profile below 3R^2/10 - 1e-6", r.below_target == 0,
                             std::to_string(r.random_samples) + " profiles, minimum " + fmt(r.random_min, 10)));
  rep.checks.push_back(check("extreme profiles: minimum at the linear one", r.extreme_min >= r.target - 1e-12 &&
                                                                                r.extreme_argmin == 0.0,
                             "minimum " + fmt(r.extreme_min, 12) + " at knot " + fmt(r.extreme_argmin)));
  rep.checks.push_back(check("constant profile gives R^2/2", std::abs(r.constant_ratio - 0.5) < 1e-12, ""));
  return rep;
}

}  // namespace

SuiteReport run_suite(const std::string& name, const VerifyOptions& opts) {
  SuiteReport rep;
  if (name == "analytic") rep = analytic_suite();
  else if (name == "bessel") rep = bessel_suite();
  else if (name == "disk") rep = disk_suite();
  else if (name == "gradients") rep = gradients_suite(opts.seed);
  else if (name == "sl") rep = sl_suite(opts.seed);
  else if (name == "collapse") rep = collapse_suite(opts);
  else if (name == "theory") rep = theory_suite();
  else if (name == "inertia") rep = inertia_suite(opts.seed);
  else throw ConfigError("unknown suite '" + name + "'");
  rep.suite = name;
  return rep;
}

void write_verify_markdown(std::ostream& os, const std::vector<SuiteReport>& reports) {
  os << "# Verification report\n\n";
  int failed = 0;
  for (const auto& r : reports) failed += !r.passed();
  os << reports.size() - failed << " of " << reports.size() << " suites passed.\n\n";
  for (const auto& r : reports) {
    os << "## " << r.suite << (r.passed() ? "" : " (FAILED)") << "\n\n";
    for (const auto& c : r.checks) {
      os << "- [" << (c.pass ? "pass" : "FAIL") << "] " << c.name;
      if (!c.detail.empty()) os << ": " << c.detail;
      os << "\n";
    }
    if (!r.tables.empty()) os << "\n" << r.tables;
    os << "\n";
  }
  if (failed) {
    os << "## Failing checks\n\n";
    for (const auto& r : reports) {
      for (const auto& c : r.checks) {
        if (!c.pass) os << "- " << r.suite << ": " << c.name << "\n";
      }
    }
  }
}

}  // namespace cneumann
