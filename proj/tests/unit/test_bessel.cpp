#include <cmath>
#include <numbers>

#include "cneumann/bessel.hpp"
#include "cneumann/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cneumann;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("J_m agrees with a 100-digit series") {
  for (double x : {1.0, 10.0, 50.0}) {
    for (int m = 0; m <= 6; ++m) {
      const double ref = oracle::jn_series(m, x);
      CHECK(bessel_j(m, x) == doctest::Approx(ref).epsilon(1e-12).scale(1e-2));
      CHECK(std::abs(bessel_j(m, x) - ref) < 1e-13);
    }
  }
}

TEST_CASE("J_m agrees with the standard library across the switch point") {
  for (int m = 0; m <= 8; ++m) {
    for (double x = 0.25; x < 40.0; x += 0.37) {
      CHECK(std::abs(bessel_j(m, x) - oracle::jn(m, x)) < 1e-12);
      CHECK(std::abs(bessel_j_prime(m, x) - oracle::jn_prime(m, x)) < 1e-12);
    }
  }
  CHECK(bessel_j(0, 0.0) == 1.0);
  CHECK(bessel_j(3, 0.0) == 0.0);
  CHECK_THROWS_AS(bessel_j(-1, 1.0), ConfigError);
}

TEST_CASE("recurrence identity for the third order") {
  const double x = 5.0;
  CHECK(x * bessel_j_prime(3, x) == doctest::Approx(x * bessel_j(2, x) - 3.0 * bessel_j(3, x)).epsilon(1e-13));
  CHECK(x * bessel_j_prime(3, x) == doctest::Approx(3.0 * bessel_j(3, x) - x * bessel_j(4, x)).epsilon(1e-13));
  // the mirrored form 3 J_3 - x J_2 has the opposite sign
  CHECK(x * bessel_j_prime(3, x) == doctest::Approx(-(3.0 * bessel_j(3, x) - x * bessel_j(2, x))).epsilon(1e-13));
}

TEST_CASE("second derivative matches a difference quotient of the first") {
  for (int m : {0, 1, 4}) {
    for (double x : {0.7, 3.3, 14.2}) {
      const double h = 1e-5;
      const double fd = (bessel_j_prime(m, x + h) - bessel_j_prime(m, x - h)) / (2 * h);
      CHECK(bessel_j_second(m, x) == doctest::Approx(fd).epsilon(1e-8));
    }
  }
}

TEST_CASE("zeros of J_m'") {
  CHECK(jprime_zero(0, 1).value == 0.0);
  for (int m = 0; m <= 5; ++m) {
    for (int l = (m == 0 ? 2 : 1); l <= 5; ++l) {
      CHECK(jprime_zero(m, l).value == doctest::Approx(oracle::jprime_zero(m, l)).epsilon(1e-11));
    }
  }
  CHECK(jprime_zero(1, 1).value == doctest::Approx(1.8411837813406593).epsilon(1e-14));
  CHECK(jprime_zero(0, 2).value == doctest::Approx(3.8317059702075123).epsilon(1e-14));
  CHECK(j0_zero(1) == doctest::Approx(2.404825557695773).epsilon(1e-14));
  CHECK(j0_zero(3) == doctest::Approx(8.653727912911013).epsilon(1e-14));
}

TEST_CASE("disk spectrum ordering and multiplicities") {
  const auto mu = disk_eigenvalues(9);
  REQUIRE(mu.size() == 9);
  const double a = oracle::jprime_zero(1, 1), b = oracle::jprime_zero(2, 1),
               c = oracle::jprime_zero(0, 2), d = oracle::jprime_zero(3, 1),
               e = oracle::jprime_zero(4, 1);
  const double expect[9] = {a * a, a * a, b * b, b * b, c * c, d * d, d * d, e * e, e * e};
  for (int i = 0; i < 9; ++i) CHECK(mu[i] == doctest::Approx(expect[i]).epsilon(1e-10));
  const auto distinct = disk_spectrum(5);
  CHECK(distinct[2].m == 0);
  CHECK(distinct[2].l == 2);
  CHECK(distinct[2].multiplicity == 1);
}

TEST_CASE("normalization constant integrates to one") {
  for (int m : {0, 1, 3}) {
    const double w = jprime_zero(m, m == 0 ? 2 : 1).value;
    const double a2 = disk_normalization_sq(m, w);
    // int_0^1 J_m(w r)^2 r dr by composite Simpson
    const int n = 4000;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double r = static_cast<double>(i) / n;
      const double v = oracle::jn(m, w * r);
      s += (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2)) * v * v * r;
    }
    s /= 3.0 * n;
    const double angular = (m == 0) ? 2.0 * kPi : kPi;
    CHECK(a2 * angular * s == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("cluster matrix matches boundary quadrature and its smallest eigenvalue") {
  FourierPerturbation f;
  f.alpha0 = 0.3;
  f.alpha[2] = 0.7;
  f.beta[2] = -0.4;
  f.alpha[3] = 0.2;
  const int m = 1;
  const double w = jprime_zero(m, 1).value;
  const double a2 = disk_normalization_sq(m, w);
  const double jm = oracle::jn(m, w);
  // boundary integrals of d_t u_a d_t u_b - w^2 u_a u_b against f
  const int q = 20000;
  double a11 = 0, a12 = 0, a22 = 0;
  for (int i = 0; i < q; ++i) {
    const double t = 2 * kPi * (i + 0.5) / q;
    const double c = std::cos(m * t), s = std::sin(m * t);
    const double u1 = c, u2 = s, d1 = -m * s, d2 = m * c;
    const double wgt = a2 * jm * jm * f(t) * 2 * kPi / q;
    a11 += wgt * (d1 * d1 - w * w * u1 * u1);
    a12 += wgt * (d1 * d2 - w * w * u1 * u2);
    a22 += wgt * (d2 * d2 - w * w * u2 * u2);
  }
  const Matrix2 M = disk_cluster_matrix(m, w, f);
  CHECK(M.a11 == doctest::Approx(a11).epsilon(1e-9));
  CHECK(M.a12 == doctest::Approx(a12).epsilon(1e-9));
  CHECK(M.a22 == doctest::Approx(a22).epsilon(1e-9));
  const double mean = 0.5 * (M.a11 + M.a22);
  const double rad = std::hypot(0.5 * (M.a11 - M.a22), M.a12);
  CHECK(mean - rad == doctest::Approx(lambda1(m, w, f)).epsilon(1e-12));
}

TEST_CASE("ratio identity for J_3 at the radial zeros") {
  // J_1(w) = 0 gives J_2 = -J_0, J_3 = 4 J_2 / w and J_3' / J_3 = w / 4 - 3 / w
  for (int l = 2; l <= 6; ++l) {
    const double w = oracle::jprime_zero(0, l);
    CHECK(oracle::jn(3, w) == doctest::Approx(4.0 * oracle::jn(2, w) / w).epsilon(1e-9));
    const double lhs = w / 4.0 - oracle::jn_prime(3, w) / oracle::jn(3, w);
    CHECK(lhs == doctest::Approx(3.0 / w).epsilon(1e-9));
    CHECK((lhs > 0.0) == (w * w > 6.0));
    // c_1 = -24 w / (w^2 - 12), negative exactly when w^2 > 12
    CHECK(disk_ck(1, w) == doctest::Approx(-24.0 * w / (w * w - 12.0)).epsilon(1e-9));
  }
}

TEST_CASE("second-order expansion for the simple eigenvalue") {
  FourierPerturbation f;
  f.alpha0 = 0.1;
  f.alpha[3] = 1.0;
  f.beta[5] = 0.5;
  const SecondOrder s = omega2(2, f);
  const double w = oracle::jprime_zero(0, 2);
  CHECK(s.omega0 == doctest::Approx(w).epsilon(1e-12));
  CHECK(s.omega1 == doctest::Approx(-0.1 * w));
  const auto ck = [&](int k) {
    const int n = 2 * k + 1;
    return w * (k * k + k) - w * w * oracle::jn(n, w) / (2 * oracle::jn_prime(n, w));
  };
  CHECK(s.c.at(1) == doctest::Approx(ck(1)).epsilon(1e-10));
  CHECK(s.c.at(2) == doctest::Approx(ck(2)).epsilon(1e-10));
  CHECK(s.omega2 == doctest::Approx(0.01 * w + ck(1) + 0.25 * ck(2)).epsilon(1e-10));

  FourierPerturbation bad;
  bad.alpha[4] = 1.0;
  CHECK_THROWS_AS(omega2(2, bad), InvalidPerturbation);
  CHECK_THROWS_AS(omega2(1, f), InvalidPerturbation);
}

TEST_CASE("improving perturbations decrease D^2 mu to the announced order") {
  for (int l = 2; l <= 6; ++l) {
    const auto p = improving_perturbation_simple(l);
    CHECK(p.first_order == 0.0);
    CHECK(p.second_order < 0.0);
    CHECK(std::abs(p.f(0.3) + p.f(0.3 + kPi)) < 1e-12);
  }
  for (auto [m, l] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{1, 2}}) {
    const auto p = improving_perturbation_multiple(m, l);
    CHECK(p.fourier.a(2 * m) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(p.fourier.b(2 * m)) < 1e-9);
    const double w = p.omega0;
    CHECK(p.lambda1 == doctest::Approx(lambda1(m, w, p.fourier)));
    // phi is pi/m periodic, so f(theta) + f(theta + pi) = 2 f(theta)
    CHECK(p.f(0.41) == doctest::Approx(p.f(0.41 + kPi / m)).epsilon(1e-12));
    if (m == 1 && l == 1) CHECK(p.first_order < 0.0);
  }
}
