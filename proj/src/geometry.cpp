#include "cneumann/geometry.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cneumann/errors.hpp"

namespace cneumann {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

double cross3(const Point& o, const Point& a, const Point& b) { return cross(a - o, b - o); }

double polygon_scale(const std::vector<Point>& v) {
  double s = 0.0;
  for (const auto& p : v) s = std::max(s, p.cwiseAbs().maxCoeff());
  return std::max(s, 1e-300);
}

}  // namespace

SupportVector::SupportVector(std::vector<double> p) : p_(std::move(p)) {
  if (p_.size() < 8 || p_.size() % 2 != 0) {
    throw ConfigError("support vector needs an even sample count >= 8, got " +
                      std::to_string(p_.size()));
  }
}

double SupportVector::step() const { return 2.0 * std::numbers::pi / size(); }
double SupportVector::angle(int i) const { return step() * wrap_index(i, size()); }

GaugeVector::GaugeVector(std::vector<double> gamma) : gamma_(std::move(gamma)) {
  if (gamma_.size() < 3) throw ConfigError("gauge vector needs at least 3 samples");
  for (double g : gamma_) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw NonConvexParameters("gauge values must be finite and strictly positive");
    }
  }
}

double GaugeVector::step() const { return 2.0 * std::numbers::pi / size(); }
double GaugeVector::angle(int i) const { return step() * wrap_index(i, size()); }

WidthBounds WidthBounds::fixed_diameter(int n_samples, double diameter) {
  WidthBounds b;
  b.lower.assign(n_samples / 2, 0.0);
  b.upper.assign(n_samples / 2, diameter);
  b.lower[0] = diameter;
  return b;
}

std::vector<double> curvature_radii(const SupportVector& sv) {
  const int n = sv.size();
  const double c = std::cos(sv.step());
  const double denom = 2.0 - 2.0 * c;
  std::vector<double> rho(n);
  for (int i = 0; i < n; ++i) rho[i] = (sv[i - 1] - 2.0 * sv[i] * c + sv[i + 1]) / denom;
  return rho;
}

std::vector<double> gauge_convexity(const GaugeVector& gv) {
  const int n = gv.size();
  const double c = std::cos(gv.step());
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = gv[i - 1] + gv[i + 1] - 2.0 * c * gv[i];
  return out;
}

ConvexPolygon polygon_from_support(const SupportVector& sv, double eps) {
  const int n = sv.size();
  const auto rho = curvature_radii(sv);
  const auto worst = std::min_element(rho.begin(), rho.end());
  if (*worst < -eps) {
    std::ostringstream msg;
    msg << "curvature radius rho_" << (worst - rho.begin()) << " = " << *worst << " < 0";
    throw NonConvexParameters(msg.str());
  }
  const double h = sv.step();
  const double two_sin = 2.0 * std::sin(h);
  ConvexPolygon poly;
  poly.vertices.reserve(n);
  poly.boundary_angles.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double th = sv.angle(i);
    const Point r(std::cos(th), std::sin(th));
    const Point t(-std::sin(th), std::cos(th));
    poly.vertices.push_back(sv[i] * r + ((sv[i + 1] - sv[i - 1]) / two_sin) * t);
    poly.boundary_angles.push_back(th);
  }
  return poly;
}

ConvexPolygon polygon_from_gauge(const GaugeVector& gv, double eps) {
  const auto conv = gauge_convexity(gv);
  const auto worst = std::min_element(conv.begin(), conv.end());
  if (*worst < -eps) {
    std::ostringstream msg;
    msg << "gauge convexity violated at " << (worst - conv.begin()) << ": " << *worst;
    throw NonConvexParameters(msg.str());
  }
  ConvexPolygon poly;
  for (int i = 0; i < gv.size(); ++i) {
    const double th = gv.angle(i);
    poly.vertices.emplace_back(std::cos(th) / gv[i], std::sin(th) / gv[i]);
    poly.boundary_angles.push_back(th);
  }
  return poly;
}

std::vector<double> widths(const SupportVector& sv) {
  const int half = sv.size() / 2;
  std::vector<double> w(half);
  for (int i = 0; i < half; ++i) w[i] = sv[i] + sv[i + half];
  return w;
}

double perimeter(const ConvexPolygon& poly) {
  double s = 0.0;
  for (int i = 0; i < poly.size(); ++i) s += (poly.vertex(i + 1) - poly.vertex(i)).norm();
  return s;
}

double area(const ConvexPolygon& poly) {
  double a = 0.0;
  for (int i = 0; i < poly.size(); ++i) a += cross(poly.vertex(i), poly.vertex(i + 1));
  return 0.5 * a;
}

Point centroid(const ConvexPolygon& poly) {
  // Shift to the first vertex for accuracy on translated polygons.
  const Point o = poly.vertices.front();
  double a = 0.0;
  Point c(0, 0);
  for (int i = 0; i < poly.size(); ++i) {
    const Point p = poly.vertex(i) - o;
    const Point q = poly.vertex(i + 1) - o;
    const double w = cross(p, q);
    a += w;
    c += w * (p + q);
  }
  if (std::abs(a) < 1e-300) return o;
  return o + c / (3.0 * a);
}

std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  const double tol = 1e-14 * polygon_scale(pts) * polygon_scale(pts);
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross3(hull[k - 2], hull[k - 1], p) <= tol) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    const auto& p = pts[i];
    while (k >= t && cross3(hull[k - 2], hull[k - 1], p) <= tol) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

namespace {

// Antipodal vertex pairs of a strictly convex counterclockwise polygon.
template <class Visit>
void rotating_calipers(const std::vector<Point>& h, Visit&& visit) {
  const std::size_t n = h.size();
  if (n == 1) {
    visit(0, 0);
    return;
  }
  if (n == 2) {
    visit(0, 1);
    return;
  }
  std::size_t j = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ni = (i + 1) % n;
    const Point e = h[ni] - h[i];
    while (cross(e, h[(j + 1) % n] - h[j]) > 0) j = (j + 1) % n;
    visit(i, j);
    visit(ni, j);
  }
}

}  // namespace

std::pair<int, int> diameter_pair(const ConvexPolygon& poly) {
  const auto hull = convex_hull(poly.vertices);
  double best = -1.0;
  Point a, b;
  rotating_calipers(hull, [&](std::size_t i, std::size_t j) {
    const double d = (hull[i] - hull[j]).squaredNorm();
    if (d > best) {
      best = d;
      a = hull[i];
      b = hull[j];
    }
  });
  int ia = 0, ib = 0;
  for (int i = 0; i < poly.size(); ++i) {
    if (poly.vertices[i] == a) ia = i;
    if (poly.vertices[i] == b) ib = i;
  }
  return {ia, ib};
}

double diameter(const ConvexPolygon& poly) {
  const auto hull = convex_hull(poly.vertices);
  double best = 0.0;
  rotating_calipers(hull, [&](std::size_t i, std::size_t j) {
    best = std::max(best, (hull[i] - hull[j]).squaredNorm());
  });
  return std::sqrt(best);
}

double minimal_width(const ConvexPolygon& poly) {
  const auto h = convex_hull(poly.vertices);
  const std::size_t n = h.size();
  if (n < 3) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::size_t j = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const Point e = h[(i + 1) % n] - h[i];
    const double len = e.norm();
    auto dist = [&](std::size_t k) { return cross(e, h[k] - h[i]) / len; };
    while (dist((j + 1) % n) > dist(j)) j = (j + 1) % n;
    best = std::min(best, dist(j));
  }
  return best;
}

bool is_convex(const ConvexPolygon& poly, double rel_tol) {
  const int n = poly.size();
  if (n < 3) return false;
  const double s = polygon_scale(poly.vertices);
  const double tol = rel_tol * s * s;
  if (area(poly) <= 0.0) return false;
  double turning = 0.0;
  for (int i = 0; i < n; ++i) {
    const Point e0 = poly.vertex(i) - poly.vertex(i - 1);
    const Point e1 = poly.vertex(i + 1) - poly.vertex(i);
    if (cross(e0, e1) < -tol) return false;
    if (e0.squaredNorm() > tol && e1.squaredNorm() > tol) {
      turning += std::atan2(cross(e0, e1), e0.dot(e1));
    }
  }
  // A simple convex polygon turns exactly once.
  return std::abs(turning - 2.0 * std::numbers::pi) < 1e-6;
}

ConvexPolygon make_rectangle(double width, double height, Point lower_left) {
  ConvexPolygon p;
  p.vertices = {lower_left, lower_left + Point(width, 0), lower_left + Point(width, height),
                lower_left + Point(0, height)};
  return p;
}

ConvexPolygon make_regular_polygon(int n, double radius, double phase) {
  ConvexPolygon p;
  for (int i = 0; i < n; ++i) {
    const double th = phase + 2.0 * std::numbers::pi * i / n;
    p.vertices.emplace_back(radius * std::cos(th), radius * std::sin(th));
    p.boundary_angles.push_back(th);
  }
  return p;
}

SupportVector support_of_points(const std::vector<Point>& pts, int n) {
  std::vector<double> p(n);
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * std::numbers::pi * i / n;
    const Point r(std::cos(th), std::sin(th));
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& q : pts) best = std::max(best, q.dot(r));
    p[i] = best;
  }
  return SupportVector(std::move(p));
}

ConvexPolygon scaled(const ConvexPolygon& poly, double factor) {
  ConvexPolygon out = poly;
  for (auto& v : out.vertices) v *= factor;
  return out;
}

}  // namespace cneumann
