#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "cneumann/bessel.hpp"
#include "cneumann/errors.hpp"
#include "cneumann/sensitivity.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cneumann;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> smooth_support(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a2 = 0.06 * u(rng), b2 = 0.06 * u(rng), a3 = 0.02 * u(rng), b3 = 0.02 * u(rng);
  std::vector<double> p(n);
  for (int i = 0; i < n; ++i) {
    const double th = 2 * kPi * i / n;
    p[i] = 0.5 + 0.1 * std::cos(th) + a2 * std::cos(2 * th) + b2 * std::sin(2 * th) +
           a3 * std::cos(3 * th) + b3 * std::sin(3 * th);
  }
  return p;
}

}  // namespace

TEST_CASE("rectangle density and edge derivative in closed form") {
  const double a = 1.0, b = 0.7;
  const auto mesh = mesh_polygon(make_rectangle(a, b), 0.04);
  FemSpace space(mesh, Element::P2);
  const auto s = neumann_spectrum(mesh, 3);
  REQUIRE(s.cluster_of(1).size() == 1);
  const auto d = boundary_density(space, s, 1);
  const double c = 2.0 / (a * b);
  double worst = 0.0;
  for (std::size_t q = 0; q < d.samples.size(); ++q) {
    const Point& x = d.samples[q].x;
    const bool horizontal = std::abs(d.samples[q].normal.y()) > 0.5;
    const double exact = horizontal ? c * kPi * kPi * std::cos(2 * kPi * x.x() / a)
                                    : c * kPi * kPi;
    worst = std::max(worst, std::abs(d.f[q] - exact));
  }
  CHECK(worst < 1e-3 * c * kPi * kPi);

  const auto F = vertex_forces(d);
  REQUIRE(F.size() == 4);
  CHECK(F[1].x() + F[2].x() == doctest::Approx(-2 * kPi * kPi / (a * a * a)).epsilon(1e-4));
  // moving the top edge leaves mu_1 = pi^2 / a^2 unchanged
  CHECK(std::abs(F[2].y() + F[3].y()) < 1e-5);
}

TEST_CASE("the zero eigenvalue has zero gradient") {
  const SupportVector sv(smooth_support(32, 3));
  const auto mesh = mesh_polygon(polygon_from_support(sv), 0.08);
  FemSpace space(mesh, Element::P2);
  const auto s = neumann_spectrum(mesh, 2);
  const auto g = support_gradient(sv, boundary_density(space, s, 0));
  CHECK(g.norm() == 0.0);
}

TEST_CASE("radial disk mode has a rotation invariant gradient") {
  const int n = 128;
  const SupportVector sv(std::vector<double>(n, 1.0));
  const auto mesh = mesh_polygon(polygon_from_support(sv), 0.06);
  FemSpace space(mesh, Element::P2);
  const auto s = neumann_spectrum(mesh, 7);
  REQUIRE(s.cluster_of(5).size() == 1);
  const double w = oracle::jprime_zero(0, 2);
  CHECK(s.mu[5] == doctest::Approx(w * w).epsilon(2e-3));
  const auto g = support_gradient(sv, boundary_density(space, s, 5));
  const double mean = g.mean();
  CHECK((g.array() - mean).abs().maxCoeff() < 1e-2 * std::abs(mean));
  // sum p_j dmu/dp_j = -2 mu with p = 1
  CHECK(g.sum() == doctest::Approx(-2.0 * s.mu[5]).epsilon(2e-3));
}

TEST_CASE("Euler relations for both parametrizations") {
  const SupportVector sv(smooth_support(48, 11));
  const auto mesh = mesh_polygon(polygon_from_support(sv), 0.03);
  FemSpace space(mesh, Element::P2);
  const auto s = neumann_spectrum(mesh, 4);
  for (int k = 1; k <= 3; ++k) {
    if (s.cluster_of(k).size() > 1) continue;
    const auto g = support_gradient(sv, boundary_density(space, s, k));
    double e = 0.0;
    for (int j = 0; j < sv.size(); ++j) e += sv[j] * g[j];
    CHECK(e == doctest::Approx(-2.0 * s.mu[k]).epsilon(2e-3));
  }

  std::vector<double> gamma(40);
  for (int j = 0; j < 40; ++j) {
    const double th = 2 * kPi * j / 40;
    gamma[j] = 1.6 + 0.2 * std::cos(2 * th) + 0.1 * std::sin(3 * th);
  }
  const GaugeVector gv(gamma);
  const auto gmesh = mesh_polygon(polygon_from_gauge(gv), 0.03);
  FemSpace gspace(gmesh, Element::P2);
  const auto gs = neumann_spectrum(gmesh, 4);
  for (int k = 1; k <= 3; ++k) {
    if (gs.cluster_of(k).size() > 1) continue;
    const auto g = gauge_gradient(gv, boundary_density(gspace, gs, k));
    double e = 0.0;
    for (int j = 0; j < gv.size(); ++j) e += gv[j] * g[j];
    // gamma -> c gamma shrinks the body by 1/c, so mu is 2-homogeneous in gamma
    CHECK(e == doctest::Approx(2.0 * gs.mu[k]).epsilon(2e-3));
  }
}

TEST_CASE("support gradient matches central differences on a fixed mesh topology") {
  const int n = 32;
  const auto p = smooth_support(n, 7);
  const SupportVector sv(p);
  const auto mesh = mesh_polygon(polygon_from_support(sv), 0.025);
  FemSpace space(mesh, Element::P2);
  const int k = 3;
  const auto s = neumann_spectrum(mesh, k + 2);
  REQUIRE(s.cluster_of(k).size() == 1);
  const auto g = support_gradient(sv, boundary_density(space, s, k));
  const auto hat = support_gradient(sv, boundary_density(space, s, k), VelocityModel::NormalAngleHat);
  const double delta = 1e-5;
  int agree = 0;
  double hat_err = 0.0, exact_err = 0.0;
  for (int j = 0; j < n; j += 4) {
    auto pp = p, pm = p;
    pp[j] += delta;
    pm[j] -= delta;
    const auto mp = deform(mesh, polygon_from_support(SupportVector(pp)).vertices);
    const auto mm = deform(mesh, polygon_from_support(SupportVector(pm)).vertices);
    const double fd =
        (neumann_spectrum(mp, k + 1).mu[k] - neumann_spectrum(mm, k + 1).mu[k]) / (2 * delta);
    if (std::abs(fd - g[j]) <= 1e-3 * (1 + std::abs(g[j]))) ++agree;
    exact_err = std::max(exact_err, std::abs(fd - g[j]) / (1 + std::abs(fd)));
    hat_err = std::max(hat_err, std::abs(fd - hat[j]) / (1 + std::abs(fd)));
  }
  CHECK(agree >= 7);
  // the angle-hat model is a coarse approximation of the same derivative
  CHECK(exact_err < 0.1 * hat_err);

  // translations leave mu unchanged: sum g_j (cos, sin)(theta_j) = 0
  double tx = 0, ty = 0;
  for (int j = 0; j < n; ++j) {
    tx += g[j] * std::cos(sv.angle(j));
    ty += g[j] * std::sin(sv.angle(j));
  }
  CHECK(std::hypot(tx, ty) < 5e-3 * g.norm());
}

TEST_CASE("gauge gradient matches central differences") {
  const int n = 24;
  std::vector<double> gamma(n);
  for (int j = 0; j < n; ++j) {
    const double th = 2 * kPi * j / n;
    gamma[j] = 1.5 + 0.15 * std::cos(2 * th) - 0.08 * std::sin(th);
  }
  const GaugeVector gv(gamma);
  const auto mesh = mesh_polygon(polygon_from_gauge(gv), 0.025);
  FemSpace space(mesh, Element::P2);
  const int k = 2;
  const auto s = neumann_spectrum(mesh, k + 2);
  REQUIRE(s.cluster_of(k).size() == 1);
  const auto g = gauge_gradient(gv, boundary_density(space, s, k));
  const double delta = 1e-5;
  for (int j = 0; j < n; j += 5) {
    auto gp = gamma, gm = gamma;
    gp[j] += delta;
    gm[j] -= delta;
    const auto mp = deform(mesh, polygon_from_gauge(GaugeVector(gp)).vertices);
    const auto mm = deform(mesh, polygon_from_gauge(GaugeVector(gm)).vertices);
    const double fd =
        (neumann_spectrum(mp, k + 1).mu[k] - neumann_spectrum(mm, k + 1).mu[k]) / (2 * delta);
    CHECK(g[j] == doctest::Approx(fd).epsilon(3e-3).scale(1.0));
  }
}

TEST_CASE("double eigenvalues are refused by the simple gradient") {
  const SupportVector sv(std::vector<double>(64, 1.0));
  const auto mesh = mesh_polygon(polygon_from_support(sv), 0.1);
  FemSpace space(mesh, Element::P2);
  const auto s = neumann_spectrum(mesh, 4);
  CHECK_THROWS_AS(boundary_density(space, s, 1), MultipleEigenvalue);
  CHECK_NOTHROW(boundary_density_unchecked(space, s, 1));
}

TEST_CASE("cluster matrix on the disk matches the closed form") {
  const int n = 256;
  const SupportVector sv(std::vector<double>(n, 1.0));
  const auto mesh = mesh_polygon(polygon_from_support(sv), 0.05);
  FemSpace space(mesh, Element::P2);
  const auto mats = assemble(space);
  const auto s = eigs(mats, 6, 2.0);
  REQUIRE(s.cluster_of(1) == std::vector<int>{1, 2});
  const auto tr = cluster_trace(space, mats, s, {1, 2});

  FourierPerturbation f;
  f.alpha0 = 0.3;
  f.alpha[2] = 0.7;
  f.beta[2] = -0.4;
  std::vector<double> vn;
  for (const auto& smp : tr.samples) vn.push_back(f(std::atan2(smp.normal.y(), smp.normal.x())));
  const Eigen::MatrixXd A = multi_density(tr, vn);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);

  const double w = jprime_zero(1, 1).value;
  const Matrix2 M = disk_cluster_matrix(1, w, f);
  const double mean = 0.5 * (M.a11 + M.a22);
  const double rad = std::hypot(0.5 * (M.a11 - M.a22), M.a12);
  CHECK(es.eigenvalues()[0] == doctest::Approx(mean - rad).epsilon(1e-2));
  CHECK(es.eigenvalues()[1] == doctest::Approx(mean + rad).epsilon(1e-2));
  CHECK(es.eigenvalues()[0] == doctest::Approx(lambda1(1, w, f)).epsilon(1e-2));
}

TEST_CASE("perimeter and diameter forces") {
  const auto sq = make_rectangle(2.0, 1.0);
  const auto F = perimeter_forces(sq.vertices);
  // moving vertex 1 = (2, 0) along (1, 0) lengthens the bottom edge only
  CHECK(F[1].x() == doctest::Approx(1.0));
  CHECK(F[1].y() == doctest::Approx(-1.0));
  const auto D = diameter_forces(sq);
  Point total = Point::Zero();
  for (const auto& d : D) total += d;
  CHECK(total.norm() < 1e-14);
  CHECK(D[0].norm() + D[2].norm() + D[1].norm() + D[3].norm() == doctest::Approx(2.0));
}

TEST_CASE("gradient CSV layout") {
  std::ostringstream os;
  write_gradient_csv(os, Eigen::Vector2d(0.5, -1.0), {0.0, kPi});
  CHECK(os.str().rfind("i,theta,dJ\n0,0,0.5\n1,", 0) == 0);
}
