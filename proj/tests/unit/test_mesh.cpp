#include <sstream>

#include "cneumann/errors.hpp"
#include "cneumann/mesh.hpp"
#include "doctest.h"

using namespace cneumann;

namespace {

void check_boundary_closed(const TriMesh& m) {
  // every boundary edge starts where the previous one ended
  const auto& e = m.boundary_edges;
  REQUIRE(!e.empty());
  for (std::size_t k = 0; k < e.size(); ++k) CHECK(e[k].b == e[(k + 1) % e.size()].a);
  for (const auto& b : e) {
    const int n = static_cast<int>(m.source_vertices.size());
    for (auto [node, t] : {std::pair{b.a, b.t0}, std::pair{b.b, b.t1}}) {
      const Point x = (1 - t) * m.source_vertices[b.dir] + t * m.source_vertices[wrap_index(b.dir + 1, n)];
      CHECK((x - m.nodes[node]).norm() < 1e-9);
    }
  }
}

}  // namespace

TEST_CASE("unit square mesh has exact area and quality") {
  auto m = mesh_polygon(make_rectangle(1.0, 1.0), 0.1);
  CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.min_angle_deg() >= 20.0);
  CHECK(m.max_circumradius() <= 0.2);
  for (int t = 0; t < m.num_triangles(); ++t) CHECK(m.triangle_area(t) > 0.0);
  check_boundary_closed(m);
}

TEST_CASE("regular 64-gon mesh matches the shoelace area") {
  auto poly = make_regular_polygon(64, 1.0, 0.1);
  auto m = mesh_polygon(poly, 0.08);
  CHECK(m.total_area() == doctest::Approx(area(poly)).epsilon(1e-12));
  CHECK(m.min_angle_deg() >= 20.0);
  check_boundary_closed(m);
}

TEST_CASE("thin rectangle is resolved across its width") {
  auto m = mesh_polygon(make_rectangle(1.0, 0.05), 0.02);
  CHECK(m.total_area() == doctest::Approx(0.05).epsilon(1e-12));
  // at least two elements across: some node strictly inside the strip
  int interior = 0;
  for (const auto& p : m.nodes) {
    if (p.y() > 0.01 && p.y() < 0.04) ++interior;
  }
  CHECK(interior > 0);
  CHECK(m.min_angle_deg() >= 20.0);
}

TEST_CASE("sharp triangle meshes with an exempt corner") {
  ConvexPolygon p;
  p.vertices = {{0, 0}, {1, 0}, {1, 0.15}};
  auto m = mesh_polygon(p, 0.05);
  CHECK(m.total_area() == doctest::Approx(0.075).epsilon(1e-12));
  check_boundary_closed(m);
}

TEST_CASE("coincident source vertices are merged") {
  ConvexPolygon p;
  p.vertices = {{0, 0}, {1, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 1e-13}};
  auto m = mesh_polygon(p, 0.2);
  CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-12));
  check_boundary_closed(m);
}

TEST_CASE("red refinement quadruples the triangles") {
  auto m = mesh_polygon(make_regular_polygon(12, 1.0), 0.3);
  auto r = refine(m);
  CHECK(r.num_triangles() == 4 * m.num_triangles());
  CHECK(r.boundary_edges.size() == 2 * m.boundary_edges.size());
  CHECK(r.total_area() == doctest::Approx(m.total_area()).epsilon(1e-13));
  check_boundary_closed(r);
}

TEST_CASE("deform moves boundary nodes onto the new polygon") {
  auto poly = make_regular_polygon(8, 1.0);
  auto m = mesh_polygon(poly, 0.2);
  auto moved = poly.vertices;
  moved[2] *= 1.01;
  auto d = deform(m, moved);
  ConvexPolygon q;
  q.vertices = moved;
  CHECK(d.total_area() == doctest::Approx(area(q)).epsilon(1e-12));
  check_boundary_closed(d);
}

TEST_CASE("mesh text round trip") {
  auto m = mesh_polygon(make_rectangle(2.0, 1.0), 0.5);
  std::stringstream ss;
  write_mesh(ss, m);
  auto r = read_mesh(ss);
  CHECK(r.num_nodes() == m.num_nodes());
  CHECK(r.num_triangles() == m.num_triangles());
  CHECK(r.boundary_edges.size() == m.boundary_edges.size());
  CHECK((r.nodes[5] - m.nodes[5]).norm() == 0.0);
}

TEST_CASE("degenerate polygon fails") {
  ConvexPolygon p;
  p.vertices = {{0, 0}, {0, 0}, {1e-14, 0}};
  CHECK_THROWS_AS(mesh_polygon(p, 0.1), MeshFailure);
}
