#pragma once

// Discrete convex bodies in the plane.
//
// A body is described either by N samples of its support function
// p_i = p(theta_i) (used with width/diameter constraints) or by N samples of
// its gauge function gamma_i = 1 / radial(theta_i) (used with perimeter
// constraints). theta_i = 2*pi*i/N throughout and all indices are cyclic.

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace cneumann {

using Point = Eigen::Vector2d;

/// Tolerance on the linear convexity / width constraints.
inline constexpr double kFeasibilityTol = 1e-10;

inline int wrap_index(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

class SupportVector {
 public:
  /// Requires an even sample count N >= 8.
  explicit SupportVector(std::vector<double> p);

  int size() const { return static_cast<int>(p_.size()); }
  double step() const;
  double angle(int i) const;
  double operator[](int i) const { return p_[wrap_index(i, size())]; }
  const std::vector<double>& values() const { return p_; }

 private:
  std::vector<double> p_;
};

class GaugeVector {
 public:
  /// Requires N >= 3 strictly positive samples.
  explicit GaugeVector(std::vector<double> gamma);

  int size() const { return static_cast<int>(gamma_.size()); }
  double step() const;
  double angle(int i) const;
  double operator[](int i) const { return gamma_[wrap_index(i, size())]; }
  const std::vector<double>& values() const { return gamma_; }

 private:
  std::vector<double> gamma_;
};

/// Counterclockwise convex polygon. boundary_angles[i] is the direction angle
/// theta_i the vertex was generated from (normal angle for support samples,
/// polar angle for gauge samples); empty for polygons built by hand.
struct ConvexPolygon {
  std::vector<Point> vertices;
  std::vector<double> boundary_angles;

  int size() const { return static_cast<int>(vertices.size()); }
  const Point& vertex(int i) const { return vertices[wrap_index(i, size())]; }
};

/// Lower / upper bounds on the widths p_i + p_{i+N/2}, i < N/2.
struct WidthBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  /// Diameter fixed to `diameter`: every width <= D and width 0 == D.
  static WidthBounds fixed_diameter(int n_samples, double diameter);
};

/// rho_i = (p_{i-1} - 2 p_i cos h + p_{i+1}) / (2 - 2 cos h).
std::vector<double> curvature_radii(const SupportVector& sv);

/// gamma_{i-1} + gamma_{i+1} - 2 cos(h) gamma_i; nonnegative iff convex.
std::vector<double> gauge_convexity(const GaugeVector& gv);

/// Vertices x_i = p_i r_i + (p_{i+1} - p_{i-1}) / (2 sin h) t_i.
/// Throws NonConvexParameters when some rho_i < -eps.
ConvexPolygon polygon_from_support(const SupportVector& sv, double eps = kFeasibilityTol);

/// Vertices x_i = r_i / gamma_i. Throws NonConvexParameters when the gauge
/// convexity inequalities fail by more than eps.
ConvexPolygon polygon_from_gauge(const GaugeVector& gv, double eps = kFeasibilityTol);

/// p_i + p_{i+N/2} for i = 0..N/2-1.
std::vector<double> widths(const SupportVector& sv);

double perimeter(const ConvexPolygon& poly);
double area(const ConvexPolygon& poly);
Point centroid(const ConvexPolygon& poly);

/// Exact diameter by rotating calipers over the strict convex hull.
double diameter(const ConvexPolygon& poly);

/// Vertex indices (into poly.vertices) of a pair realizing the diameter.
std::pair<int, int> diameter_pair(const ConvexPolygon& poly);

/// Minimal width over all directions (rotating calipers).
double minimal_width(const ConvexPolygon& poly);

/// All cross products of consecutive edges >= -rel_tol * scale^2 and the
/// polygon is counterclockwise with positive area.
bool is_convex(const ConvexPolygon& poly, double rel_tol = 1e-12);

/// Strictly convex hull (Andrew monotone chain), counterclockwise.
std::vector<Point> convex_hull(std::vector<Point> pts);

ConvexPolygon make_rectangle(double width, double height, Point lower_left = Point(0, 0));
ConvexPolygon make_regular_polygon(int n, double radius, double phase = 0.0);

/// Support samples p(theta_i) of an arbitrary point set's convex hull.
SupportVector support_of_points(const std::vector<Point>& pts, int n);

ConvexPolygon scaled(const ConvexPolygon& poly, double factor);

}  // namespace cneumann
