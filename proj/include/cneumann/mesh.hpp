#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cneumann/geometry.hpp"

namespace cneumann {

/// A mesh edge on the domain boundary. Nodes a -> b run counterclockwise and
/// lie on the source polygon edge `dir` (from source vertex dir to dir + 1) at
/// affine parameters t0, t1 in [0, 1].
struct BoundaryEdge {
  int a = 0;
  int b = 0;
  int dir = 0;
  double t0 = 0.0;
  double t1 = 0.0;
};

struct TriMesh {
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;
  /// Vertices of the polygon the mesh was generated from; boundary edge tags
  /// index into this array.
  std::vector<Point> source_vertices;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  double triangle_area(int t) const;
  double total_area() const;
  double min_angle_deg() const;
  double max_circumradius() const;
};

struct MeshOptions {
  double min_angle_deg = 20.0;
  /// Circumradius above which a triangle is split, relative to target_h.
  double size_ratio = 0.75;
  /// Source vertices closer than this (relative to the polygon scale) are
  /// merged before meshing.
  double merge_rel_tol = 1e-9;
  /// Hard cap on Steiner point insertions; exceeded -> MeshFailure.
  int max_insertions = 400000;
};

/// Quality triangulation of a convex polygon by constrained Delaunay
/// refinement. Boundary spacing <= target_h.
TriMesh mesh_polygon(const ConvexPolygon& poly, double target_h, const MeshOptions& opts = {});

/// Uniform red refinement: every triangle split into four.
TriMesh refine(const TriMesh& mesh);

/// Moves the mesh to a new source polygon with the same vertex count. Boundary
/// nodes keep their edge parameters; interior nodes follow the discrete
/// harmonic extension of the boundary displacement.
TriMesh deform(const TriMesh& mesh, const std::vector<Point>& new_source_vertices);

/// Text format: a header line "N T B" (node, triangle and boundary edge
/// counts), then node lines "x y",
/// triangle lines "i j k", boundary lines "i j dir t0 t1".
void write_mesh(std::ostream& os, const TriMesh& mesh);
TriMesh read_mesh(std::istream& is);

}  // namespace cneumann
