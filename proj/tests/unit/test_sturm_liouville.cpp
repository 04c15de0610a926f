#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "cneumann/errors.hpp"
#include "cneumann/sturm_liouville.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cneumann;

namespace {

constexpr double kPi = std::numbers::pi;

double tent(double x) { return 1.0 - std::abs(2.0 * x - 1.0); }

// Vertex-centred finite volumes: fluxes weighted by h at cell midpoints,
// masses by the exact integral of h over each dual cell. A dense generalized
// solve, independent of the library's eigensolver.
std::vector<double> fv_oracle(double (*h)(double), int n, int count) {
  const double dx = 1.0 / n;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + 1, n + 1), M = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int j = 0; j < n; ++j) {
    const double a = h(j * dx), b = h((j + 1) * dx), mid = h((j + 0.5) * dx);
    const double flux = mid / dx;
    K(j, j) += flux;
    K(j + 1, j + 1) += flux;
    K(j, j + 1) -= flux;
    K(j + 1, j) -= flux;
    // halves of the linear interpolant's integral over [x_j, x_{j+1}]
    M(j, j) += dx * (3 * a + b) / 8.0;
    M(j + 1, j + 1) += dx * (a + 3 * b) / 8.0;
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
  std::vector<double> mu;
  for (int i = 0; i < count; ++i) mu.push_back(es.eigenvalues()[i]);
  return mu;
}

Profile random_concave(std::mt19937& rng, int n) {
  // minimum of affine functions that are nonnegative on [0, 1]
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::uniform_int_distribution<int> pieces(1, 6);
  const int m = pieces(rng);
  std::vector<std::pair<double, double>> lines;
  for (int i = 0; i < m; ++i) lines.emplace_back(u(rng), u(rng));
  if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.3) lines.emplace_back(0.0, 2.0);
  return Profile::sample(
             [&](double x) {
               double v = 1e300;
               for (auto [a, b] : lines) v = std::min(v, a + (b - a) * x);
               return v;
             },
             n)
      .normalized();
}

}  // namespace

TEST_CASE("constant weight reproduces (k pi)^2") {
  const auto s = sl_eigs(Profile::sample([](double) { return 1.0; }, 2000), 5);
  CHECK(std::abs(s.mu[0]) < 1e-8);
  for (int k = 1; k <= 5; ++k) {
    const double exact = std::pow(k * kPi, 2);
    CHECK(std::abs(s.mu[k] - exact) / exact < 1e-6);
  }
}

TEST_CASE("convergence order on constant and tent weights") {
  auto err = [](double (*h)(double), int n, double exact) {
    return std::abs(sl_eigs(Profile::sample(h, n), 1).mu[1] - exact);
  };
  const double flat = kPi * kPi;
  double (*one)(double) = [](double) { return 1.0; };
  CHECK(std::log2(err(one, 20, flat) / err(one, 40, flat)) >= 1.9);
  // the tent splits into two linear halves solved by J_0
  const double t1 = std::pow(2.0 * oracle::j_zero(0, 1), 2);
  const double order = std::log2(err(tent, 50, t1) / err(tent, 100, t1));
  CHECK(order >= 1.9);
}

TEST_CASE("tent weight against the Bessel value and a finite-volume oracle") {
  const auto s = sl_eigs(Profile::sample(tent, 2000), 2);
  const double exact1 = std::pow(2.0 * oracle::j_zero(0, 1), 2);
  const double exact2 = std::pow(2.0 * oracle::jprime_zero(0, 2), 2);
  CHECK(s.mu[1] == doctest::Approx(exact1).epsilon(1e-6));
  CHECK(s.mu[2] == doctest::Approx(exact2).epsilon(1e-6));

  const auto a = fv_oracle(tent, 200, 3), b = fv_oracle(tent, 400, 3);
  const double extrapolated = (4.0 * b[1] - a[1]) / 3.0;
  CHECK(s.mu[1] == doctest::Approx(extrapolated).epsilon(1e-4));
  CHECK(s.mu[1] == doctest::Approx(a[1]).epsilon(2e-3));
}

TEST_CASE("linear weight vanishing at one end") {
  double (*lin)(double) = [](double x) { return x; };
  const auto coarse = sl_eigs(Profile::sample(lin, 500), 3);
  const auto fine = sl_eigs(Profile::sample(lin, 1000), 3);
  for (int k = 1; k <= 3; ++k) {
    const double exact = std::pow(oracle::jprime_zero(0, k + 1), 2);
    CHECK(std::isfinite(fine.mu[k]));
    CHECK(std::abs(fine.mu[k] - exact) <= std::abs(coarse.mu[k] - exact) + 1e-12);
    CHECK(fine.mu[k] == doctest::Approx(exact).epsilon(1e-4));
  }
}

TEST_CASE("weight scaling leaves the spectrum unchanged") {
  std::mt19937 rng(5);
  const Profile p = random_concave(rng, 400);
  Profile q = p;
  for (double& v : q.h) v *= 37.5;
  const auto a = sl_eigs(p, 4), b = sl_eigs(q, 4);
  for (int k = 1; k <= 4; ++k) CHECK(std::abs(a.mu[k] - b.mu[k]) <= 1e-12 * a.mu[k] * 10);
}

TEST_CASE("k-th eigenfunction has k sign changes") {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const auto s = sl_eigs(random_concave(rng, 600), 6);
    for (int k = 0; k <= 6; ++k) CHECK(s.sign_changes(k) == k);
    const auto len = s.nodal_lengths(3);
    REQUIRE(len.size() == 4);
    double total = 0.0;
    for (double l : len) total += l;
    CHECK(total == doctest::Approx(1.0));
  }
}

TEST_CASE("lower bound (k pi)^2 over concave weights") {
  const auto flat = sl_lower_bound_check(Profile::sample([](double) { return 1.0; }, 2000), 4);
  for (const auto& r : flat) {
    CHECK(r.holds);
    CHECK(std::abs(r.margin) < 1e-6);
    // cos(k pi x): half intervals at the ends, full ones inside
    const auto& len = r.nodal_lengths;
    REQUIRE(len.size() == static_cast<std::size_t>(r.k + 1));
    for (std::size_t i = 0; i < len.size(); ++i) {
      const bool end = i == 0 || i + 1 == len.size();
      CHECK(len[i] == doctest::Approx((end ? 0.5 : 1.0) / r.k).epsilon(1e-3));
    }
  }
  for (const auto& r : sl_lower_bound_check(Profile::sample(tent, 2000), 3)) {
    CHECK(r.margin > 0.0);
  }
  std::mt19937 rng(2024);
  int ok = 0;
  for (int i = 0; i < 50; ++i) {
    const Profile p = random_concave(rng, 1000);
    REQUIRE(p.is_concave());
    bool all = true;
    for (const auto& r : sl_lower_bound_check(p, 4)) all = all && r.holds;
    ok += all;
  }
  CHECK(ok == 50);
}

TEST_CASE("a weight vanishing on an interval is rejected") {
  const Profile p = Profile::sample([](double x) { return x < 0.2 ? 0.0 : x; }, 100);
  CHECK_THROWS_AS(sl_eigs(p, 2), DegenerateWeight);
  Profile neg = Profile::sample([](double) { return 1.0; }, 10);
  neg.h[3] = -0.5;
  CHECK_THROWS_AS(sl_eigs(neg, 2), ConfigError);
}

TEST_CASE("thin rectangles keep mu_1 = pi^2 and mu_2 = 4 pi^2") {
  const Profile flat = Profile::sample([](double) { return 1.0; }, 8);
  const auto poly = thin_domain(flat, 0.1);
  CHECK(poly.size() == 4);
  const auto t1 = collapse_experiment(flat, 1, {0.2, 0.1, 0.05});
  CHECK(t1.limit == doctest::Approx(kPi * kPi).epsilon(1e-9));
  for (const auto& r : t1.rows) {
    REQUIRE_FALSE(r.skipped);
    CHECK(r.mu == doctest::Approx(kPi * kPi).epsilon(1e-5));
  }
  const auto t2 = collapse_experiment(flat, 2, {0.1, 0.05});
  for (const auto& r : t2.rows) CHECK(r.mu == doctest::Approx(4 * kPi * kPi).epsilon(1e-5));
}

TEST_CASE("thin triangles approach the tent eigenvalue") {
  const Profile p = Profile::sample(tent, 2);
  const auto poly = thin_domain(p, 0.1);
  CHECK(poly.size() == 3);
  const auto t = collapse_experiment(p, 1);
  CHECK(t.limit == doctest::Approx(std::pow(2.0 * oracle::j_zero(0, 1), 2)).epsilon(1e-6));
  REQUIRE(t.rows.size() == 4);
  CHECK(t.monotone);
  CHECK(std::abs(t.rows.back().gap) < std::abs(t.rows.front().gap));
  std::ostringstream os;
  write_collapse_csv(os, t);
  CHECK(os.str().rfind("eps,k,mu_fem,mu_limit,gap,triangles,note\n0.2,1,", 0) == 0);
}

TEST_CASE("inertia ratio of linear and constant profiles") {
  const double R = 1.7;
  std::vector<double> lin(11), one(11, 1.0);
  for (int j = 0; j <= 10; ++j) lin[j] = 1.0 - j / 10.0;
  CHECK(inertia_ratio(lin, R) == doctest::Approx(0.3 * R * R).epsilon(1e-14));
  CHECK(inertia_ratio(one, R) == doctest::Approx(0.5 * R * R).epsilon(1e-14));

  const auto rep = inertia_ratio_check(R, 64, 10000, 3);
  CHECK(rep.below_target == 0);
  CHECK(rep.random_min >= rep.target - 1e-6);
  CHECK(rep.extreme_min == doctest::Approx(rep.target).epsilon(1e-12));
  CHECK(rep.extreme_argmin == 0.0);
}

TEST_CASE("profiles read from text and resampled") {
  std::istringstream is("# x h\n0 0\n0.25 0.5\n1 1\n");
  const Profile p = read_profile(is);
  REQUIRE(p.h.size() == 3);
  CHECK(p.h[1] == doctest::Approx(2.0 / 3.0));
  CHECK(p.resampled(4).h[1] == doctest::Approx(p(0.25)));
  std::istringstream bad("0 1\n0.5 1\n0.4 1\n");
  CHECK_THROWS_AS(read_profile(bad), ConfigError);
}
