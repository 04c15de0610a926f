#include <cmath>
#include <numbers>

#include "cneumann/fem.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cneumann;
using std::numbers::pi;

TEST_CASE("P1 stiffness of the reference triangle") {
  TriMesh m;
  m.nodes = {{0, 0}, {1, 0}, {0, 1}};
  m.triangles = {{0, 1, 2}};
  m.boundary_edges = {{0, 1, 0, 0, 1}, {1, 2, 1, 0, 1}, {2, 0, 2, 0, 1}};
  FemSpace space(m, Element::P1);
  auto mats = assemble(space);
  const double expected[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(mats.stiffness.coeff(i, j) == doctest::Approx(expected[i][j]));
  }
  // consistent P1 mass: area/12 * (1 + delta_ij)
  CHECK(mats.mass.coeff(0, 0) == doctest::Approx(1.0 / 12.0));
  CHECK(mats.mass.coeff(0, 1) == doctest::Approx(1.0 / 24.0));
}

TEST_CASE("P2 matrices: kernel, area and symmetry") {
  auto poly = make_regular_polygon(7, 1.3, 0.2);
  auto m = mesh_polygon(poly, 0.3);
  for (Element el : {Element::P1, Element::P2}) {
    FemSpace space(m, el);
    auto mats = assemble(space);
    Eigen::VectorXd one = Eigen::VectorXd::Ones(space.num_dofs());
    CHECK((mats.stiffness * one).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(one.dot(mats.mass * one) == doctest::Approx(area(poly)).epsilon(1e-12));
    SparseMatrix kt = mats.stiffness.transpose();
    CHECK((kt - mats.stiffness).norm() <= 1e-14 * mats.stiffness.norm());
    SparseMatrix mt = mats.mass.transpose();
    CHECK((mt - mats.mass).norm() <= 1e-14 * mats.mass.norm());
  }
}

TEST_CASE("unit square spectrum") {
  auto m = mesh_polygon(make_rectangle(1, 1), 0.05);
  auto s = neumann_spectrum(m, 8);
  const double pi2 = pi * pi;
  const double exact[8] = {0, pi2, pi2, 2 * pi2, 4 * pi2, 4 * pi2, 5 * pi2, 5 * pi2};
  CHECK(std::abs(s.mu[0]) < 1e-8);
  for (int i = 1; i < 8; ++i) CHECK(s.mu[i] == doctest::Approx(exact[i]).epsilon(2e-5));
  for (double r : s.residuals) CHECK(r <= 1e-8);
  REQUIRE(s.clusters.size() >= 4);
  CHECK(s.clusters[1] == std::vector<int>{1, 2});
  CHECK(s.clusters[2] == std::vector<int>{3});

  FemSpace space(m, Element::P2);
  auto mats = assemble(space);
  Eigen::MatrixXd G = s.vectors.transpose() * (mats.mass * s.vectors);
  CHECK((G - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-8);
  // constant eigenvector
  const Eigen::VectorXd& u0 = s.vectors.col(0);
  CHECK((u0.array() - u0[0]).abs().maxCoeff() < 1e-6 * std::abs(u0[0]));
}

TEST_CASE("Polya inequality on the square") {
  auto m = mesh_polygon(make_rectangle(1, 1), 0.06);
  auto s = neumann_spectrum(m, 13);
  for (int k = 1; k <= 12; ++k) CHECK(s.mu[k] < 4.0 * pi * k);
}

TEST_CASE("scaling the domain by c divides eigenvalues by c^2") {
  auto m = mesh_polygon(make_regular_polygon(9, 1.0), 0.15);
  auto big = m;
  for (auto& p : big.nodes) p *= 2.0;
  auto s1 = neumann_spectrum(m, 6);
  auto s2 = neumann_spectrum(big, 6);
  for (int i = 1; i < 6; ++i) CHECK(s2.mu[i] * 4.0 == doctest::Approx(s1.mu[i]).epsilon(1e-10));
}

TEST_CASE("P2 converges at order >= 3 on the square") {
  auto m = mesh_polygon(make_rectangle(1, 1), 0.25);
  const double pi2 = pi * pi;
  double prev = 0.0;
  for (int level = 0; level < 3; ++level) {
    auto s = neumann_spectrum(m, 4);
    const double err = std::abs(s.mu[3] - 2 * pi2);
    if (level > 0) CHECK(std::log2(prev / err) >= 3.0);
    prev = err;
    m = refine(m);
  }
}

TEST_CASE("P1 and P2 agree on a coarse pentagon") {
  auto m = refine(mesh_polygon(make_regular_polygon(5, 1.0), 0.1));
  auto s1 = neumann_spectrum(m, 5, Element::P1);
  auto s2 = neumann_spectrum(m, 5, Element::P2);
  for (int i = 1; i < 5; ++i) {
    CHECK(s1.mu[i] == doctest::Approx(s2.mu[i]).epsilon(2e-3));
    CHECK(s1.mu[i] >= s2.mu[i]);  // both are upper bounds; P2 is tighter
  }
}

TEST_CASE("disk polygon matches squared Bessel derivative zeros") {
  auto m = mesh_polygon(make_regular_polygon(256, 1.0), 0.06);
  auto s = neumann_spectrum(m, 10);
  const double expected[] = {oracle::jprime_zero(1, 1), oracle::jprime_zero(1, 1),
                             oracle::jprime_zero(2, 1), oracle::jprime_zero(2, 1),
                             oracle::jprime_zero(0, 2), oracle::jprime_zero(3, 1),
                             oracle::jprime_zero(3, 1), oracle::jprime_zero(4, 1),
                             oracle::jprime_zero(4, 1)};
  for (int i = 1; i < 10; ++i) {
    CHECK(s.mu[i] == doctest::Approx(expected[i - 1] * expected[i - 1]).epsilon(2e-3));
  }
  CHECK(s.clusters[1] == std::vector<int>{1, 2});
  CHECK(s.clusters[2] == std::vector<int>{3, 4});
  CHECK(s.clusters[3] == std::vector<int>{5});
}

TEST_CASE("cluster partition rule") {
  auto c = cluster({0.0, 10.0, 10.04, 10.2, 50.0, 50.2, 50.4});
  REQUIRE(c.size() == 4);
  CHECK(c[1] == std::vector<int>{1, 2});
  CHECK(c[2] == std::vector<int>{3});
  CHECK(c[3] == std::vector<int>{4, 5, 6});
}

TEST_CASE("spectrum JSON export") {
  Spectrum s;
  s.mu = {0.0, 1.5};
  s.residuals = {0.0, 1e-12};
  s.clusters = {{0}, {1}};
  const auto j = spectrum_json(s);
  CHECK(j.find("\"mu\"") != std::string::npos);
  CHECK(j.find("\"clusters\"") != std::string::npos);
}
