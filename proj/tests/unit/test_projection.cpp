#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

#include "cneumann/errors.hpp"
#include "cneumann/projection.hpp"
#include "doctest.h"

using namespace cneumann;

namespace {

Eigen::MatrixXd dense_rows(const LinearConstraints& c) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c.rows.size()), c.dim);
  for (std::size_t r = 0; r < c.rows.size(); ++r) {
    for (const auto& [j, a] : c.rows[r]) A(static_cast<Eigen::Index>(r), j) += a;
  }
  return A;
}

// Independent check of optimality: x is feasible and y - x lies in the cone
// spanned by the rows active at x. The multipliers come from projected
// coordinate descent on min ||A_act^T l - (y - x)||, l >= 0.
double kkt_residual(const LinearConstraints& c, const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd A = dense_rows(c);
  const Eigen::VectorXd s = c.slack(x);
  std::vector<int> act;
  for (int r = 0; r < s.size(); ++r) {
    if (s[r] > -1e-8) act.push_back(r);
  }
  const Eigen::VectorXd g = y - x;
  if (act.empty()) return g.norm();
  Eigen::MatrixXd B(x.size(), static_cast<Eigen::Index>(act.size()));
  for (std::size_t i = 0; i < act.size(); ++i) B.col(static_cast<Eigen::Index>(i)) = A.row(act[i]).transpose();
  Eigen::VectorXd l = Eigen::VectorXd::Zero(B.cols());
  Eigen::VectorXd res = -g;
  for (int sweep = 0; sweep < 20000; ++sweep) {
    for (Eigen::Index i = 0; i < B.cols(); ++i) {
      const double nn = B.col(i).squaredNorm();
      if (nn == 0.0) continue;
      const double li = std::max(0.0, l[i] - B.col(i).dot(res) / nn);
      res += (li - l[i]) * B.col(i);
      l[i] = li;
    }
  }
  return res.norm();
}

Eigen::VectorXd disk_support(int n, double r) { return Eigen::VectorXd::Constant(n, r); }

}  // namespace

TEST_CASE("a feasible point is its own projection") {
  const int n = 16;
  const auto c = support_constraints(n, WidthBounds::fixed_diameter(n, 1.0));
  const auto y = disk_support(n, 0.5);
  const auto r = project_feasible(y, c);
  CHECK((r.x - y).norm() < 1e-14);
  CHECK(r.max_violation <= kFeasibilityTol);
}

TEST_CASE("one negative curvature radius at N = 12") {
  const int n = 12;
  const auto c = support_constraints(n);
  Eigen::VectorXd y = disk_support(n, 1.0);
  y[3] += 0.4;  // pushes rho_2 and rho_4 negative
  const auto before = c.slack(y);
  CHECK(before.maxCoeff() > 0.0);

  const auto r = project_feasible(y, c);
  CHECK(r.max_violation <= kFeasibilityTol);
  std::vector<double> p(r.x.data(), r.x.data() + n);
  for (double rho : curvature_radii(SupportVector(p))) CHECK(rho >= -1e-9);
  CHECK(kkt_residual(c, y, r.x) < 1e-8);

  // no other feasible point is closer to y
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(-5e-4, 5e-4);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd z = disk_support(n, 1.0);
    for (int i = 0; i < n; ++i) z[i] += u(gen);
    const auto pz = project_feasible(z, c).x;
    CHECK((pz - y).norm() >= (r.x - y).norm() - 1e-10);
  }
}

TEST_CASE("random projections satisfy the optimality conditions") {
  std::mt19937 gen(11);
  std::normal_distribution<double> nd(0.0, 0.1);
  for (int n : {12, 16}) {
    const auto c = support_constraints(n, WidthBounds::fixed_diameter(n, 1.0));
    for (int t = 0; t < 10; ++t) {
      Eigen::VectorXd y = disk_support(n, 0.5);
      for (int i = 0; i < n; ++i) y[i] += nd(gen);
      const auto r = project_feasible(y, c);
      CHECK(r.max_violation <= 1e-9);
      CHECK(kkt_residual(c, y, r.x) < 1e-7);
    }
  }
}

TEST_CASE("constant support 0.4 with every width fixed to one") {
  const int n = 16;
  WidthBounds w;
  w.lower.assign(n / 2, 1.0);
  w.upper.assign(n / 2, 1.0);
  const auto c = support_constraints(n, w);
  const auto r = project_feasible(disk_support(n, 0.4), c);
  std::vector<double> p(r.x.data(), r.x.data() + n);
  for (double width : widths(SupportVector(p))) CHECK(width == doctest::Approx(1.0).epsilon(1e-9));
  // the closest constant-width body to a centered disk is the disk of radius 1/2
  for (double v : p) CHECK(v == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("direction 0 width pinned at one, the rest only bounded") {
  const int n = 16;
  const auto c = support_constraints(n, WidthBounds::fixed_diameter(n, 1.0));
  const auto r = project_feasible(disk_support(n, 0.4), c);
  std::vector<double> p(r.x.data(), r.x.data() + n);
  const auto wd = widths(SupportVector(p));
  CHECK(wd[0] == doctest::Approx(1.0).epsilon(1e-9));
  for (double width : wd) CHECK(width <= 1.0 + 1e-9);
  CHECK(kkt_residual(c, disk_support(n, 0.4), r.x) < 1e-8);
}

TEST_CASE("contradictory width bounds") {
  const int n = 12;
  WidthBounds w;
  w.lower.assign(n / 2, 1.0);
  w.upper.assign(n / 2, 0.5);
  CHECK_THROWS_AS(project_feasible(disk_support(n, 0.4), support_constraints(n, w)), EmptyFeasibleSet);

  // rows that are each satisfiable but jointly empty: x0 <= -1 and x0 >= 1
  LinearConstraints c;
  c.dim = 2;
  c.add({{0, 1.0}}, -1.0);
  c.add({{0, -1.0}}, -1.0);
  CHECK_THROWS_AS(project_feasible(Eigen::VectorXd::Zero(2), c), EmptyFeasibleSet);
}

TEST_CASE("gauge feasible set") {
  const int n = 24;
  const auto c = gauge_constraints(n, 0.1);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(n, 1.0);
  y[5] = 0.02;  // below gamma_min
  y[6] = 1.6;   // inward dent, not convex
  const auto r = project_feasible(y, c);
  CHECK(r.max_violation <= kFeasibilityTol);
  std::vector<double> g(r.x.data(), r.x.data() + n);
  for (double v : gauge_convexity(GaugeVector(g))) CHECK(v >= -1e-9);
  for (double v : g) CHECK(v >= 0.1 - 1e-9);
  CHECK(kkt_residual(c, y, r.x) < 1e-8);
}
