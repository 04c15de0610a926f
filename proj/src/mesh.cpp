#include "cneumann/mesh.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "cneumann/errors.hpp"

namespace cneumann {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }
double orient(const Point& a, const Point& b, const Point& c) { return cross(b - a, c - a); }

// > 0 when d lies inside the circumcircle of the counterclockwise triangle abc.
double incircle(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

Point circumcenter(const Point& a, const Point& b, const Point& c) {
  const Point ba = b - a, ca = c - a;
  const double d = 2.0 * cross(ba, ca);
  const double b2 = ba.squaredNorm(), c2 = ca.squaredNorm();
  return a + Point(ca.y() * b2 - ba.y() * c2, ba.x() * c2 - ca.x() * b2) / d;
}

inline int nxt(int i) { return i == 2 ? 0 : i + 1; }
inline int prv(int i) { return i == 0 ? 2 : i - 1; }

// Source polygon with coincident vertices merged.
struct CleanPolygon {
  std::vector<Point> points;   // clean vertex positions
  std::vector<int> edge_dir;   // clean edge j (points[j] -> points[j+1]) lies on source edge dir
  std::vector<double> angle;   // interior angle at clean vertex j
};

CleanPolygon clean_polygon(const std::vector<Point>& src, double tol) {
  const int n = static_cast<int>(src.size());
  if (n < 3) throw MeshFailure("polygon needs at least 3 vertices");
  auto close = [&](int i, int j) {
    return (src[wrap_index(i, n)] - src[wrap_index(j, n)]).norm() <= tol;
  };
  int start = -1;
  for (int i = 0; i < n; ++i) {
    if (!close(i, i - 1)) {
      start = i;
      break;
    }
  }
  if (start < 0) throw MeshFailure("polygon collapsed to a point");
  CleanPolygon cp;
  std::vector<int> last;
  int i = start;
  int visited = 0;
  while (visited < n) {
    const int first = wrap_index(i, n);
    int j = i;
    while (visited + (j - i) + 1 < n && close(j + 1, j)) ++j;
    cp.points.push_back(src[first]);
    last.push_back(wrap_index(j, n));
    visited += j - i + 1;
    i = j + 1;
  }
  const int m = static_cast<int>(cp.points.size());
  if (m < 3) throw MeshFailure("polygon degenerates to fewer than 3 distinct vertices");
  cp.edge_dir = last;
  cp.angle.resize(m);
  for (int j = 0; j < m; ++j) {
    const Point e0 = cp.points[j] - cp.points[wrap_index(j - 1, m)];
    const Point e1 = cp.points[wrap_index(j + 1, m)] - cp.points[j];
    const double turn = std::atan2(cross(e0, e1), e0.dot(e1));
    if (turn < -1e-9) throw MeshFailure("polygon is not convex / counterclockwise");
    cp.angle[j] = std::numbers::pi - turn;
  }
  return cp;
}

struct Segment {
  int a = 0, b = 0;
  int clean_edge = 0;
  double ta = 0.0, tb = 0.0;  // parameters on the source edge
};

class Refiner {
 public:
  Refiner(const std::vector<Point>& source, double target_h, const MeshOptions& opts)
      : source_(source), h_(target_h), opts_(opts) {
    double scale = 0.0;
    for (const auto& p : source) scale = std::max(scale, p.norm());
    Point lo = source.front(), hi = source.front();
    for (const auto& p : source) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    scale_ = std::max((hi - lo).norm(), 1e-300);
    clean_ = clean_polygon(source, opts.merge_rel_tol * scale_);
    bad_ratio_ = 1.0 / (2.0 * std::sin(opts.min_angle_deg * std::numbers::pi / 180.0));
    build_boundary();
    build_fan();
    make_delaunay();
  }

  TriMesh run() {
    split_encroached_initial();
    refine_loop();
    return extract();
  }

 private:
  // ---- construction -----------------------------------------------------
  double source_param(int clean_edge, const Point& x) const {
    const int n = static_cast<int>(source_.size());
    const int dir = clean_.edge_dir[clean_edge];
    const Point& a = source_[dir];
    const Point& b = source_[wrap_index(dir + 1, n)];
    const Point d = b - a;
    return std::clamp((x - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  }

  int add_point(const Point& p, int clean_edge, int corner) {
    pts_.push_back(p);
    node_edge_.push_back(clean_edge);
    node_corner_.push_back(corner);
    node_tri_.push_back(-1);
    return static_cast<int>(pts_.size()) - 1;
  }

  void build_boundary() {
    const int m = static_cast<int>(clean_.points.size());
    std::vector<int> ring;
    std::vector<double> ring_param_start;
    for (int j = 0; j < m; ++j) {
      const Point& a = clean_.points[j];
      const Point& b = clean_.points[wrap_index(j + 1, m)];
      const int pieces = std::max(1, static_cast<int>(std::ceil((b - a).norm() / h_ - 1e-9)));
      for (int s = 0; s < pieces; ++s) {
        const Point x = a + (static_cast<double>(s) / pieces) * (b - a);
        ring.push_back(add_point(x, s == 0 ? -1 : j, s == 0 ? j : -1));
      }
    }
    // Segments follow the ring; the owning clean edge of segment (u, w) is the
    // edge of w unless w is a corner, then the edge of u / the corner before w.
    const int r = static_cast<int>(ring.size());
    for (int k = 0; k < r; ++k) {
      const int u = ring[k], w = ring[(k + 1) % r];
      int e = node_edge_[u] >= 0 ? node_edge_[u] : node_corner_[u];
      Segment s;
      s.a = u;
      s.b = w;
      s.clean_edge = e;
      s.ta = source_param(e, pts_[u]);
      s.tb = node_corner_[w] >= 0 ? 1.0 : source_param(e, pts_[w]);
      if (node_corner_[u] >= 0) s.ta = 0.0;
      segs_.push_back(s);
    }
    ring_ = ring;
  }

  int new_triangle() {
    tv_.push_back({-1, -1, -1});
    tn_.push_back({-1, -1, -1});
    ts_.push_back({-1, -1, -1});
    alive_.push_back(1);
    return static_cast<int>(tv_.size()) - 1;
  }

  void set_tri(int t, std::array<int, 3> v, std::array<int, 3> n, std::array<int, 3> s) {
    tv_[t] = v;
    tn_[t] = n;
    ts_[t] = s;
    for (int k = 0; k < 3; ++k) node_tri_[v[k]] = t;
  }

  void build_fan() {
    Point c(0, 0);
    for (const auto& p : clean_.points) c += p;
    c /= static_cast<double>(clean_.points.size());
    const int ci = add_point(c, -1, -1);
    const int r = static_cast<int>(ring_.size());
    for (int k = 0; k < r; ++k) new_triangle();
    for (int k = 0; k < r; ++k) {
      set_tri(k, {ci, ring_[k], ring_[(k + 1) % r]}, {-1, (k + 1) % r, (k + r - 1) % r},
              {k, -1, -1});
    }
  }

  int edge_in(int u, int a, int b) const {
    // index j in triangle u of the edge running a -> b
    for (int j = 0; j < 3; ++j) {
      if (tv_[u][nxt(j)] == a && tv_[u][prv(j)] == b) return j;
    }
    return -1;
  }

  void replace_nb(int t, int old_nb, int new_nb) {
    if (t < 0) return;
    for (int k = 0; k < 3; ++k) {
      if (tn_[t][k] == old_nb) {
        tn_[t][k] = new_nb;
        return;
      }
    }
  }

  // Flip the edge opposite vertex i of t. Returns false when not flippable.
  // Afterwards t = (a, b, d) and u = (a, d, c) with a the old tv_[t][i].
  bool flip(int t, int i) {
    const int u = tn_[t][i];
    if (u < 0 || ts_[t][i] >= 0) return false;
    const int a = tv_[t][i], b = tv_[t][nxt(i)], c = tv_[t][prv(i)];
    const int j = edge_in(u, c, b);
    if (j < 0) throw MeshFailure("inconsistent adjacency");
    const int d = tv_[u][j];
    if (orient(pts_[a], pts_[b], pts_[d]) <= 0.0 || orient(pts_[a], pts_[d], pts_[c]) <= 0.0) {
      return false;
    }
    const int n_ca = tn_[t][nxt(i)], n_ab = tn_[t][prv(i)];
    const int s_ca = ts_[t][nxt(i)], s_ab = ts_[t][prv(i)];
    // u = (d, c, b): the edge opposite c is (b, d), the one opposite b is (d, c)
    const int n_bd = tn_[u][nxt(j)], n_dc = tn_[u][prv(j)];
    const int s_bd = ts_[u][nxt(j)], s_dc = ts_[u][prv(j)];
    set_tri(t, {a, b, d}, {n_bd, u, n_ab}, {s_bd, -1, s_ab});
    set_tri(u, {a, d, c}, {n_dc, n_ca, t}, {s_dc, s_ca, -1});
    replace_nb(n_ca, t, u);
    replace_nb(n_bd, u, t);
    return true;
  }

  bool locally_delaunay(int t, int k) const {
    const int u = tn_[t][k];
    if (u < 0 || ts_[t][k] >= 0) return true;
    const int b = tv_[t][nxt(k)], c = tv_[t][prv(k)];
    const int j = edge_in(u, c, b);
    const int d = tv_[u][j];
    const auto& v = tv_[t];
    // Relative tolerance so that cocircular quadruples do not flip back and forth.
    double r2 = 0.0;
    for (int q = 0; q < 3; ++q) r2 = std::max(r2, (pts_[v[q]] - pts_[d]).squaredNorm());
    return incircle(pts_[v[0]], pts_[v[1]], pts_[v[2]], pts_[d]) <= 1e-12 * r2 * r2;
  }

  void make_delaunay() {
    std::vector<std::pair<int, int>> stack;
    for (int t = 0; t < static_cast<int>(tv_.size()); ++t) {
      for (int k = 0; k < 3; ++k) stack.emplace_back(t, k);
    }
    std::size_t guard = 0;
    while (!stack.empty()) {
      auto [t, k] = stack.back();
      stack.pop_back();
      if (!alive_[t] || locally_delaunay(t, k)) continue;
      const int u = tn_[t][k];
      if (flip(t, k)) {
        for (int q = 0; q < 3; ++q) {
          stack.emplace_back(t, q);
          stack.emplace_back(u, q);
        }
      }
      if (++guard > 50000000) throw MeshFailure("Lawson flipping did not terminate");
    }
  }

  // Restore the Delaunay property around a new point p = tv_[t][0] for each
  // seed triangle. Collects every touched triangle in `touched`.
  void legalize(std::vector<int> seeds, std::vector<int>& touched) {
    while (!seeds.empty()) {
      const int t = seeds.back();
      seeds.pop_back();
      touched.push_back(t);
      if (locally_delaunay(t, 0)) continue;
      const int u = tn_[t][0];
      if (flip(t, 0)) {
        seeds.push_back(t);
        seeds.push_back(u);
      }
    }
  }

  // ---- point location / insertion --------------------------------------
  struct Location {
    enum Kind { Inside, OnEdge, Outside } kind;
    int tri;
    int edge;
  };

  Location locate(int start, const Point& p) const {
    int t = start;
    const std::size_t limit = 4 * tv_.size() + 100;
    for (std::size_t step = 0; step < limit; ++step) {
      int move = -1;
      int on_edge = -1;
      for (int q = 0; q < 3; ++q) {
        const int k = (q + static_cast<int>(step)) % 3;
        const Point& a = pts_[tv_[t][nxt(k)]];
        const Point& b = pts_[tv_[t][prv(k)]];
        const double o = orient(a, b, p);
        const double eps = 1e-13 * (b - a).squaredNorm();
        if (o < -eps) {
          move = k;
          break;
        }
        if (o <= eps) on_edge = k;
      }
      if (move < 0) {
        if (on_edge >= 0) return {Location::OnEdge, t, on_edge};
        return {Location::Inside, t, -1};
      }
      if (tn_[t][move] < 0) return {Location::Outside, t, move};
      t = tn_[t][move];
    }
    throw MeshFailure("point location did not terminate");
  }

  void insert_inside(int t, int p, std::vector<int>& touched) {
    const auto v = tv_[t];
    const auto n = tn_[t];
    const auto s = ts_[t];
    const int t1 = new_triangle(), t2 = new_triangle();
    set_tri(t, {p, v[1], v[2]}, {n[0], t1, t2}, {s[0], -1, -1});
    set_tri(t1, {p, v[2], v[0]}, {n[1], t2, t}, {s[1], -1, -1});
    set_tri(t2, {p, v[0], v[1]}, {n[2], t, t1}, {s[2], -1, -1});
    replace_nb(n[1], t, t1);
    replace_nb(n[2], t, t2);
    legalize({t, t1, t2}, touched);
  }

  // Split edge k of triangle t (interior edge or boundary segment) at p.
  void insert_on_edge(int t, int k, int p, std::vector<int>& touched) {
    const int a = tv_[t][k], b = tv_[t][nxt(k)], c = tv_[t][prv(k)];
    const int n_ca = tn_[t][nxt(k)], n_ab = tn_[t][prv(k)];
    const int s_ca = ts_[t][nxt(k)], s_ab = ts_[t][prv(k)];
    const int seg = ts_[t][k];
    const int u = tn_[t][k];
    const int t2 = new_triangle();
    if (seg >= 0 || u < 0) {
      // boundary segment b -> c
      const int s2 = static_cast<int>(segs_.size());
      Segment old = segs_[seg];
      Segment first = old, second = old;
      const double tm = source_param(old.clean_edge, pts_[p]);
      first.b = p;
      first.tb = tm;
      second.a = p;
      second.ta = tm;
      segs_[seg] = first;
      segs_.push_back(second);
      // T1 = (p, c, a) reuses t; T2 = (p, a, b)
      set_tri(t, {p, c, a}, {n_ca, t2, -1}, {s_ca, -1, s2});
      set_tri(t2, {p, a, b}, {n_ab, -1, t}, {s_ab, seg, -1});
      replace_nb(n_ab, t, t2);
      legalize({t, t2}, touched);
      return;
    }
    const int j = edge_in(u, c, b);
    const int d = tv_[u][j];
    const int n_bd = tn_[u][nxt(j)];  // opposite c in u = (d, c, b): edge (b, d)
    const int n_dc = tn_[u][prv(j)];  // opposite b: edge (d, c)
    const int s_bd = ts_[u][nxt(j)], s_dc = ts_[u][prv(j)];
    const int u2 = new_triangle();
    set_tri(t, {p, c, a}, {n_ca, t2, u}, {s_ca, -1, -1});
    set_tri(t2, {p, a, b}, {n_ab, u2, t}, {s_ab, -1, -1});
    set_tri(u, {p, d, c}, {n_dc, t, u2}, {s_dc, -1, -1});
    set_tri(u2, {p, b, d}, {n_bd, u, t2}, {s_bd, -1, -1});
    replace_nb(n_ab, t, t2);
    replace_nb(n_bd, u, u2);
    legalize({t, t2, u, u2}, touched);
  }

  // ---- refinement ------------------------------------------------------
  int triangle_with_segment(int s) const {
    const int a = segs_[s].a, b = segs_[s].b;
    // walk the fan around a
    int t = node_tri_[a];
    for (std::size_t guard = 0; guard < tv_.size() + 8; ++guard) {
      const int k = edge_in(t, a, b);
      if (k >= 0) return t;
      // rotate clockwise around a by crossing the edge (a, next)
      int ia = 0;
      while (tv_[t][ia] != a) ++ia;
      const int nt = tn_[t][prv(ia)];
      if (nt < 0) break;
      t = nt;
    }
    for (int q = 0; q < static_cast<int>(tv_.size()); ++q) {
      if (alive_[q] && edge_in(q, a, b) >= 0) return q;
    }
    throw MeshFailure("segment lost from triangulation");
  }

  bool encroaches(int s, const Point& p) const {
    const Point& a = pts_[segs_[s].a];
    const Point& b = pts_[segs_[s].b];
    return (a - p).dot(b - p) < -1e-12 * (b - a).squaredNorm();
  }

  bool is_acute_corner(int node) const {
    const int c = node_corner_[node];
    return c >= 0 && clean_.angle[c] < std::numbers::pi / 3.0 + 1e-9;
  }

  Point split_point(int s) const {
    const Segment& seg = segs_[s];
    const Point& a = pts_[seg.a];
    const Point& b = pts_[seg.b];
    const double len = (b - a).norm();
    const bool ca = is_acute_corner(seg.a), cb = is_acute_corner(seg.b);
    if (ca != cb) {
      // concentric shells around the acute corner
      const double k = std::round(std::log2(0.5 * len / h_));
      double d = h_ * std::exp2(k);
      if (d < len / 3.0 || d > 2.0 * len / 3.0) d = 0.5 * len;
      const Point& apex = ca ? a : b;
      const Point& other = ca ? b : a;
      return apex + (d / len) * (other - apex);
    }
    return 0.5 * (a + b);
  }

  void split_segment(int s, std::vector<int>& touched) {
    const int t = triangle_with_segment(s);
    const int k = edge_in(t, segs_[s].a, segs_[s].b);
    const Point p = split_point(s);
    const int node = add_point(p, segs_[s].clean_edge, -1);
    insert_on_edge(t, k, node, touched);
    ++insertions_;
  }

  void split_encroached_initial() {
    bool changed = true;
    std::vector<int> touched;
    while (changed) {
      changed = false;
      for (int s = 0; s < static_cast<int>(segs_.size()); ++s) {
        const int t = triangle_with_segment(s);
        const int o = tv_[t][edge_in(t, segs_[s].a, segs_[s].b)];
        if (encroaches(s, pts_[o])) {
          split_segment(s, touched);
          changed = true;
        }
      }
      check_budget();
    }
  }

  bool on_edge_near_corner(int node, int edge, int corner) const {
    return node_corner_[node] == corner || node_edge_[node] == edge;
  }

  bool exempt_skinny(int u, int w) const {
    const int m = static_cast<int>(clean_.points.size());
    auto on_boundary = [&](int n) { return node_edge_[n] >= 0 || node_corner_[n] >= 0; };
    if (!on_boundary(u) || !on_boundary(w)) return false;
    for (int c = 0; c < m; ++c) {
      if (clean_.angle[c] >= std::numbers::pi / 3.0 + 1e-9) continue;
      const int ea = wrap_index(c - 1, m), eb = c;
      const bool ua = on_edge_near_corner(u, ea, c), ub = on_edge_near_corner(u, eb, c);
      const bool wa = on_edge_near_corner(w, ea, c), wb = on_edge_near_corner(w, eb, c);
      if ((ua && wb) || (ub && wa)) return true;
    }
    return false;
  }

  enum class Badness { Good, Size, Angle };

  Badness badness(int t) const {
    const auto& v = tv_[t];
    const Point &a = pts_[v[0]], &b = pts_[v[1]], &c = pts_[v[2]];
    const double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
    const double ar = 0.5 * orient(a, b, c);
    if (ar <= 0.0) return Badness::Good;  // degenerate slivers are left to flips
    const double r = la * lb * lc / (4.0 * ar);
    if (r > opts_.size_ratio * h_) return Badness::Size;
    double lmin = la;
    int u = v[1], w = v[2];
    if (lb < lmin) {
      lmin = lb;
      u = v[2];
      w = v[0];
    }
    if (lc < lmin) {
      lmin = lc;
      u = v[0];
      w = v[1];
    }
    if (r / lmin > bad_ratio_ && !exempt_skinny(u, w)) return Badness::Angle;
    return Badness::Good;
  }

  void check_budget() const {
    if (insertions_ > opts_.max_insertions) {
      throw MeshFailure("quality targets unreachable within the insertion budget");
    }
  }

  void refine_loop() {
    std::deque<std::pair<int, std::array<int, 3>>> queue;
    for (int t = 0; t < static_cast<int>(tv_.size()); ++t) queue.emplace_back(t, tv_[t]);
    std::vector<int> touched;
    while (!queue.empty()) {
      auto [t, key] = queue.front();
      queue.pop_front();
      if (!alive_[t] || tv_[t] != key) continue;
      if (badness(t) == Badness::Good) continue;
      const auto& v = tv_[t];
      const Point cc = circumcenter(pts_[v[0]], pts_[v[1]], pts_[v[2]]);
      touched.clear();
      bool split_any = false;
      for (int s = 0; s < static_cast<int>(segs_.size()); ++s) {
        if (encroaches(s, cc)) {
          split_segment(s, touched);
          split_any = true;
        }
      }
      if (!split_any) {
        const Location loc = locate(t, cc);
        if (loc.kind == Location::Outside) {
          const int s = ts_[loc.tri][loc.edge];
          if (s < 0) throw MeshFailure("walked out of the domain through a non-segment edge");
          split_segment(s, touched);
        } else {
          const int node = add_point(cc, -1, -1);
          if (loc.kind == Location::Inside) {
            insert_inside(loc.tri, node, touched);
          } else {
            insert_on_edge(loc.tri, loc.edge, node, touched);
          }
          ++insertions_;
        }
      }
      check_budget();
      for (int q : touched) {
        if (alive_[q]) queue.emplace_back(q, tv_[q]);
      }
      if (alive_[t]) queue.emplace_back(t, tv_[t]);
    }
  }

  TriMesh extract() const {
    TriMesh mesh;
    mesh.nodes = pts_;
    mesh.source_vertices = source_;
    for (std::size_t t = 0; t < tv_.size(); ++t) {
      if (alive_[t]) mesh.triangles.push_back(tv_[t]);
    }
    // boundary edges in ring order starting from the first corner
    std::vector<int> next_seg(pts_.size(), -1);
    for (int s = 0; s < static_cast<int>(segs_.size()); ++s) next_seg[segs_[s].a] = s;
    int s = next_seg[ring_.front()];
    for (std::size_t k = 0; k < segs_.size(); ++k) {
      const Segment& seg = segs_[s];
      mesh.boundary_edges.push_back(
          {seg.a, seg.b, clean_.edge_dir[seg.clean_edge], seg.ta, seg.tb});
      s = next_seg[seg.b];
    }
    return mesh;
  }

  const std::vector<Point>& source_;
  double h_;
  MeshOptions opts_;
  double scale_ = 1.0;
  double bad_ratio_ = 1.0;
  CleanPolygon clean_;

  std::vector<Point> pts_;
  std::vector<int> node_edge_;    // clean edge of a non-corner boundary node
  std::vector<int> node_corner_;  // clean vertex index of a corner node
  std::vector<int> node_tri_;
  std::vector<int> ring_;
  std::vector<std::array<int, 3>> tv_, tn_, ts_;
  std::vector<char> alive_;
  std::vector<Segment> segs_;
  int insertions_ = 0;
};

}  // namespace

double TriMesh::triangle_area(int t) const {
  const auto& v = triangles[t];
  return 0.5 * orient(nodes[v[0]], nodes[v[1]], nodes[v[2]]);
}

double TriMesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < num_triangles(); ++t) a += triangle_area(t);
  return a;
}

double TriMesh::min_angle_deg() const {
  double best = 180.0;
  for (const auto& v : triangles) {
    for (int k = 0; k < 3; ++k) {
      const Point e0 = nodes[v[nxt(k)]] - nodes[v[k]];
      const Point e1 = nodes[v[prv(k)]] - nodes[v[k]];
      const double ang = std::atan2(std::abs(cross(e0, e1)), e0.dot(e1));
      best = std::min(best, ang * 180.0 / std::numbers::pi);
    }
  }
  return best;
}

double TriMesh::max_circumradius() const {
  double best = 0.0;
  for (const auto& v : triangles) {
    const Point &a = nodes[v[0]], &b = nodes[v[1]], &c = nodes[v[2]];
    const double r = (b - c).norm() * (c - a).norm() * (a - b).norm() / (2.0 * orient(a, b, c));
    best = std::max(best, r);
  }
  return best;
}

TriMesh mesh_polygon(const ConvexPolygon& poly, double target_h, const MeshOptions& opts) {
  if (!(target_h > 0.0)) throw MeshFailure("target_h must be positive");
  Refiner refiner(poly.vertices, target_h, opts);
  return refiner.run();
}

TriMesh refine(const TriMesh& mesh) {
  TriMesh out;
  out.nodes = mesh.nodes;
  out.source_vertices = mesh.source_vertices;
  std::map<std::pair<int, int>, int> mid;
  auto midpoint = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = mid.find(key);
    if (it != mid.end()) return it->second;
    out.nodes.push_back(0.5 * (mesh.nodes[a] + mesh.nodes[b]));
    const int id = static_cast<int>(out.nodes.size()) - 1;
    mid.emplace(key, id);
    return id;
  };
  out.triangles.reserve(4 * mesh.triangles.size());
  for (const auto& v : mesh.triangles) {
    const int ab = midpoint(v[0], v[1]), bc = midpoint(v[1], v[2]), ca = midpoint(v[2], v[0]);
    out.triangles.push_back({v[0], ab, ca});
    out.triangles.push_back({v[1], bc, ab});
    out.triangles.push_back({v[2], ca, bc});
    out.triangles.push_back({ab, bc, ca});
  }
  for (const auto& e : mesh.boundary_edges) {
    const int m = midpoint(e.a, e.b);
    const double tm = 0.5 * (e.t0 + e.t1);
    out.boundary_edges.push_back({e.a, m, e.dir, e.t0, tm});
    out.boundary_edges.push_back({m, e.b, e.dir, tm, e.t1});
  }
  return out;
}

TriMesh deform(const TriMesh& mesh, const std::vector<Point>& new_source) {
  const int n_src = static_cast<int>(mesh.source_vertices.size());
  if (static_cast<int>(new_source.size()) != n_src) {
    throw MeshFailure("deform: source vertex count mismatch");
  }
  const int n = mesh.num_nodes();
  std::vector<char> fixed(n, 0);
  std::vector<Point> disp(n, Point::Zero());
  auto place = [&](int node, int dir, double t) {
    if (fixed[node]) return;
    const Point x = (1.0 - t) * new_source[dir] + t * new_source[wrap_index(dir + 1, n_src)];
    disp[node] = x - mesh.nodes[node];
    fixed[node] = 1;
  };
  for (const auto& e : mesh.boundary_edges) {
    place(e.a, e.dir, e.t0);
    place(e.b, e.dir, e.t1);
  }
  // interior numbering
  std::vector<int> idx(n, -1);
  int m = 0;
  for (int i = 0; i < n; ++i) {
    if (!fixed[i]) idx[i] = m++;
  }
  TriMesh out = mesh;
  out.source_vertices = new_source;
  if (m > 0) {
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, 2);
    for (const auto& v : mesh.triangles) {
      const Point p[3] = {mesh.nodes[v[0]], mesh.nodes[v[1]], mesh.nodes[v[2]]};
      const double ar = 0.5 * orient(p[0], p[1], p[2]);
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const Point ga = Point(p[nxt(a)].y() - p[prv(a)].y(), p[prv(a)].x() - p[nxt(a)].x());
          const Point gb = Point(p[nxt(b)].y() - p[prv(b)].y(), p[prv(b)].x() - p[nxt(b)].x());
          const double k = ga.dot(gb) / (4.0 * ar);
          const int ia = idx[v[a]], ib = idx[v[b]];
          if (ia < 0) continue;
          if (ib >= 0) {
            trip.emplace_back(ia, ib, k);
          } else {
            rhs.row(ia) -= k * disp[v[b]].transpose();
          }
        }
      }
    }
    Eigen::SparseMatrix<double> lap(m, m);
    lap.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
    if (solver.info() != Eigen::Success) throw MeshFailure("harmonic extension failed");
    const Eigen::MatrixXd sol = solver.solve(rhs);
    for (int i = 0; i < n; ++i) {
      if (idx[i] >= 0) disp[i] = sol.row(idx[i]).transpose();
    }
  }
  for (int i = 0; i < n; ++i) out.nodes[i] = mesh.nodes[i] + disp[i];
  return out;
}

void write_mesh(std::ostream& os, const TriMesh& mesh) {
  os.precision(17);
  os << mesh.num_nodes() << ' ' << mesh.num_triangles() << ' ' << mesh.boundary_edges.size()
     << '\n';
  for (const auto& p : mesh.nodes) os << p.x() << ' ' << p.y() << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary_edges) {
    os << e.a << ' ' << e.b << ' ' << e.dir << ' ' << e.t0 << ' ' << e.t1 << '\n';
  }
}

TriMesh read_mesh(std::istream& is) {
  TriMesh mesh;
  std::size_t nn = 0, nt = 0, nb = 0;
  if (!(is >> nn >> nt >> nb)) throw MeshFailure("bad mesh header");
  mesh.nodes.resize(nn);
  mesh.triangles.resize(nt);
  mesh.boundary_edges.resize(nb);
  for (auto& p : mesh.nodes) is >> p.x() >> p.y();
  for (auto& t : mesh.triangles) is >> t[0] >> t[1] >> t[2];
  for (auto& e : mesh.boundary_edges) is >> e.a >> e.b >> e.dir >> e.t0 >> e.t1;
  if (!is) throw MeshFailure("truncated mesh file");
  return mesh;
}

}  // namespace cneumann
