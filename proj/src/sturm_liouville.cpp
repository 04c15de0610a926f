#include "cneumann/sturm_liouville.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "cneumann/errors.hpp"
#include "cneumann/mesh.hpp"

namespace cneumann {

Profile Profile::sample(const std::function<double(double)>& f, int intervals) {
  if (intervals < 2) throw ConfigError("a profile needs at least 2 intervals");
  Profile p;
  p.h.resize(intervals + 1);
  for (int j = 0; j <= intervals; ++j) p.h[j] = f(static_cast<double>(j) / intervals);
  return p;
}

double Profile::operator()(double x) const {
  const int n = intervals();
  const double s = std::clamp(x, 0.0, 1.0) * n;
  const int j = std::min(static_cast<int>(s), n - 1);
  const double t = s - j;
  return (1.0 - t) * h[j] + t * h[j + 1];
}

bool Profile::is_concave(double tol) const {
  for (int j = 1; j < intervals(); ++j) {
    if (h[j - 1] - 2.0 * h[j] + h[j + 1] > tol) return false;
  }
  return true;
}

Profile Profile::normalized() const {
  const double top = *std::max_element(h.begin(), h.end());
  if (!(top > 0.0)) throw DegenerateWeight("profile has no positive sample");
  Profile p = *this;
  for (double& v : p.h) v /= top;
  return p;
}

Profile Profile::resampled(int n) const {
  return sample([this](double x) { return (*this)(x); }, n);
}

Profile read_profile(std::istream& is) {
  std::vector<double> xs, hs;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double x, v;
    if (!(ls >> x)) continue;
    if (!(ls >> v)) throw ConfigError("profile line without an h value: " + line);
    if (!xs.empty() && x <= xs.back()) throw ConfigError("profile abscissae must increase");
    xs.push_back(x);
    hs.push_back(v);
  }
  if (xs.size() < 3) throw ConfigError("profile needs at least 3 samples");
  if (std::abs(xs.front()) > 1e-9 || std::abs(xs.back() - 1.0) > 1e-9) {
    throw ConfigError("profile abscissae must span [0, 1]");
  }
  const int n = static_cast<int>(xs.size()) - 1;
  Profile p;
  p.h.resize(n + 1);
  std::size_t seg = 0;
  for (int j = 0; j <= n; ++j) {
    const double x = static_cast<double>(j) / n;
    while (seg + 2 < xs.size() && xs[seg + 1] < x) ++seg;
    const double t = std::clamp((x - xs[seg]) / (xs[seg + 1] - xs[seg]), 0.0, 1.0);
    p.h[j] = (1.0 - t) * hs[seg] + t * hs[seg + 1];
  }
  return p;
}

int SLSpectrum::sign_changes(int k) const {
  const Eigen::VectorXd u = vectors.col(k);
  const double tiny = 1e-10 * u.cwiseAbs().maxCoeff();
  int changes = 0, last = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const int s = u[i] > tiny ? 1 : (u[i] < -tiny ? -1 : 0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

std::vector<double> SLSpectrum::nodal_lengths(int k) const {
  const Eigen::VectorXd u = vectors.col(k);
  const int n = static_cast<int>(u.size()) - 1;
  std::vector<double> zeros{0.0};
  for (int i = 0; i < n; ++i) {
    if ((u[i] > 0.0 && u[i + 1] < 0.0) || (u[i] < 0.0 && u[i + 1] > 0.0)) {
      zeros.push_back((i + u[i] / (u[i] - u[i + 1])) / n);
    }
  }
  zeros.push_back(1.0);
  std::vector<double> len;
  for (std::size_t i = 1; i < zeros.size(); ++i) len.push_back(zeros[i] - zeros[i - 1]);
  return len;
}

SLSpectrum sl_eigs(const Profile& profile, int K) {
  const int n = profile.intervals();
  if (n < 2) throw ConfigError("profile needs at least 2 intervals");
  if (K < 0) throw ConfigError("eigenvalue count must be nonnegative");
  for (double v : profile.h) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("profile values must be finite and >= 0");
  }
  std::vector<double> w(n + 1);
  for (int j = 0; j <= n; ++j) w[j] = std::max(profile.h[j], kWeightFloor);
  for (int j = 0; j < n; ++j) {
    if (profile.h[j] <= kWeightFloor && profile.h[j + 1] <= kWeightFloor) {
      throw DegenerateWeight("h vanishes on [" + std::to_string(profile.x(j)) + ", " +
                             std::to_string(profile.x(j + 1)) + "]");
    }
  }

  const double dx = 1.0 / n;
  std::vector<Eigen::Triplet<double>> kt, mt;
  for (int e = 0; e < n; ++e) {
    const double a = w[e], b = w[e + 1];
    const double ks = 0.5 * (a + b) / dx;
    // exact mass of the linear weight, then blended with its row-sum lumping
    const double m00 = dx * (3.0 * a + b) / 12.0;
    const double m11 = dx * (a + 3.0 * b) / 12.0;
    const double m01 = dx * (a + b) / 12.0;
    kt.emplace_back(e, e, ks);
    kt.emplace_back(e + 1, e + 1, ks);
    kt.emplace_back(e, e + 1, -ks);
    kt.emplace_back(e + 1, e, -ks);
    mt.emplace_back(e, e, 0.5 * m00 + 0.5 * (m00 + m01));
    mt.emplace_back(e + 1, e + 1, 0.5 * m11 + 0.5 * (m11 + m01));
    mt.emplace_back(e, e + 1, 0.5 * m01);
    mt.emplace_back(e + 1, e, 0.5 * m01);
  }
  FemMatrices mats;
  mats.stiffness.resize(n + 1, n + 1);
  mats.mass.resize(n + 1, n + 1);
  mats.stiffness.setFromTriplets(kt.begin(), kt.end());
  mats.mass.setFromTriplets(mt.begin(), mt.end());

  EigenOptions opts;
  opts.residual_tol = 1e-9;
  const Spectrum s = eigs(mats, K + 1, 1.0, opts);
  SLSpectrum out;
  out.mu = s.mu;
  out.vectors = s.vectors;
  return out;
}

std::vector<LowerBoundRow> sl_lower_bound_check(const Profile& profile, int K, double rel_tol) {
  const SLSpectrum s = sl_eigs(profile, K);
  std::vector<LowerBoundRow> rows;
  for (int k = 1; k <= K; ++k) {
    LowerBoundRow r;
    r.k = k;
    r.mu = s.mu[k];
    r.bound = std::pow(k * std::numbers::pi, 2);
    r.margin = r.mu / r.bound - 1.0;
    r.holds = r.margin >= -rel_tol;
    r.nodal_lengths = s.nodal_lengths(k);
    rows.push_back(std::move(r));
  }
  return rows;
}

ConvexPolygon thin_domain(const Profile& profile, double eps, int segments) {
  if (!(eps > 0.0)) throw ConfigError("thickness must be positive");
  const Profile coarse = profile.resampled(segments);
  std::vector<Point> top;
  for (int j = segments; j >= 0; --j) {
    const double y = eps * coarse.h[j];
    if (y <= 0.0) continue;
    top.emplace_back(coarse.x(j), y);
  }
  std::vector<Point> pts{Point(0.0, 0.0), Point(1.0, 0.0)};
  pts.insert(pts.end(), top.begin(), top.end());
  // drop collinear vertices; x spacing is uniform so a relative test suffices
  std::vector<Point> kept;
  const int n = static_cast<int>(pts.size());
  for (int i = 0; i < n; ++i) {
    const Point& a = pts[wrap_index(i - 1, n)];
    const Point& b = pts[i];
    const Point& c = pts[wrap_index(i + 1, n)];
    const Point u = b - a, v = c - b;
    const double cross = u.x() * v.y() - u.y() * v.x();
    if (cross > 1e-12 * u.norm() * v.norm()) kept.push_back(b);
  }
  ConvexPolygon poly;
  poly.vertices = std::move(kept);
  if (poly.size() < 3) throw MeshFailure("thin domain collapsed");
  return poly;
}

CollapseTable collapse_experiment(const Profile& profile, int k, const std::vector<double>& eps_list,
                                  int segments, Element element) {
  if (k < 1) throw ConfigError("eigenvalue index must be >= 1");
  CollapseTable table;
  table.k = k;
  const Profile limit_profile = profile.resampled(segments).resampled(segments * 64);
  table.limit = sl_eigs(limit_profile, k).mu[k];
  const double top = *std::max_element(profile.h.begin(), profile.h.end());

  std::vector<double> eps = eps_list;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  for (double e : eps) {
    CollapseRow row;
    row.eps = e;
    try {
      const ConvexPolygon poly = thin_domain(profile, e, segments);
      // at least three element layers across the thickest section
      const double h = std::min(0.05, e * top / 3.0);
      const TriMesh mesh = mesh_polygon(poly, h);
      row.triangles = mesh.num_triangles();
      row.mu = neumann_spectrum(mesh, k + 1, element).mu[k];
      row.gap = row.mu - table.limit;
    } catch (const Error& err) {
      row.skipped = true;
      row.note = err.what();
    }
    table.rows.push_back(std::move(row));
  }
  table.monotone = true;
  double prev = -1.0;
  for (const auto& r : table.rows) {
    if (r.skipped) continue;
    const double g = std::abs(r.gap);
    if (prev >= 0.0 && g > prev * (1.0 + 1e-9) + 1e-9) table.monotone = false;
    prev = g;
  }
  return table;
}

void write_collapse_csv(std::ostream& os, const CollapseTable& table) {
  os << "eps,k,mu_fem,mu_limit,gap,triangles,note\n";
  os.precision(12);
  for (const auto& r : table.rows) {
    os << r.eps << ',' << table.k << ',';
    if (r.skipped) {
      os << ",," << ",," << '"' << r.note << '"' << '\n';
    } else {
      os << r.mu << ',' << table.limit << ',' << r.gap << ',' << r.triangles << ",\n";
    }
  }
}

double inertia_ratio(const std::vector<double>& h, double R) {
  const int n = static_cast<int>(h.size()) - 1;
  if (n < 1) throw ConfigError("inertia profile needs at least 2 samples");
  double num = 0.0, den = 0.0;
  for (int j = 0; j < n; ++j) {
    const double r0 = R * j / n, r1 = R * (j + 1) / n;
    const double slope = (h[j + 1] - h[j]) / (r1 - r0);
    const double c = h[j] - slope * r0;  // h = c + slope r on the piece
    auto mom = [&](int p) {
      return c * (std::pow(r1, p + 1) - std::pow(r0, p + 1)) / (p + 1) +
             slope * (std::pow(r1, p + 2) - std::pow(r0, p + 2)) / (p + 2);
    };
    num += mom(3);
    den += mom(1);
  }
  return num / den;
}

InertiaReport inertia_ratio_check(double R, int grid, int random_samples, unsigned seed) {
  if (!(R > 0.0) || grid < 2) throw ConfigError("inertia check needs R > 0 and grid >= 2");
  InertiaReport rep;
  rep.R = R;
  rep.target = 0.3 * R * R;
  std::vector<double> lin(grid + 1), one(grid + 1, 1.0);
  for (int j = 0; j <= grid; ++j) lin[j] = 1.0 - static_cast<double>(j) / grid;
  rep.linear_ratio = inertia_ratio(lin, R);
  rep.constant_ratio = inertia_ratio(one, R);

  // the ratio is a quotient of linear functionals, so over this convex class
  // its minimum sits at an extreme profile: flat up to a, then linear to 0
  rep.extreme_min = rep.constant_ratio;
  rep.extreme_argmin = R;
  for (int a = 0; a < grid; ++a) {
    std::vector<double> h(grid + 1);
    for (int j = 0; j <= grid; ++j) {
      h[j] = std::min(1.0, static_cast<double>(grid - j) / (grid - a));
    }
    const double r = inertia_ratio(h, R);
    if (r < rep.extreme_min) {
      rep.extreme_min = r;
      rep.extreme_argmin = R * a / grid;
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  rep.random_samples = random_samples;
  rep.random_min = std::numeric_limits<double>::infinity();
  std::vector<double> slope(grid), h(grid + 1);
  for (int s = 0; s < random_samples; ++s) {
    // nondecreasing descent rates give a concave nonincreasing profile
    const double sparsity = unif(rng);
    double d = unif(rng) < 0.5 ? 0.0 : unif(rng);
    for (int j = 0; j < grid; ++j) {
      if (unif(rng) > sparsity) d += unif(rng);
      slope[j] = d;
    }
    double total = 0.0;
    for (double v : slope) total += v;
    const double drop = unif(rng);
    h[0] = 1.0;
    for (int j = 0; j < grid; ++j) {
      h[j + 1] = total > 0.0 ? h[j] - drop * slope[j] / total : h[j];
    }
    h[grid] = std::max(h[grid], 0.0);
    const double r = inertia_ratio(h, R);
    if (r < rep.target - 1e-6) ++rep.below_target;
    if (r < rep.random_min) {
      rep.random_min = r;
      double dist = 0.0;
      for (int j = 0; j <= grid; ++j) dist = std::max(dist, std::abs(h[j] - lin[j]));
      rep.random_best_distance = dist;
    }
  }
  return rep;
}

}  // namespace cneumann
