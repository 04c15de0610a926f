#pragma once

// Euclidean projection onto polyhedra {x : a_j . x <= b_j} with sparse rows,
// the feasible sets of the support and gauge parametrizations.

#include <Eigen/Core>

#include <utility>
#include <vector>

#include "cneumann/geometry.hpp"

namespace cneumann {

struct LinearConstraints {
  int dim = 0;
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<double> rhs;

  void add(std::vector<std::pair<int, double>> row, double b);
  /// a . x - b for every row.
  Eigen::VectorXd slack(const Eigen::VectorXd& x) const;
  /// max(0, a . x - b) over rows.
  double max_violation(const Eigen::VectorXd& x) const;
};

/// rho_i >= 0 (scaled by 2 - 2 cos h) and the width bounds; an equal lower
/// and upper bound becomes two opposite rows.
LinearConstraints support_constraints(int n, const WidthBounds& widths);
LinearConstraints support_constraints(int n);

/// Gauge convexity rows and gamma_i >= gamma_min.
LinearConstraints gauge_constraints(int n, double gamma_min);

struct ProjectionOptions {
  double tol = 1e-11;
  int max_sweeps = 200000;
  /// Sweeps before switching to the primal active-set method when a
  /// feasible point is known.
  int hildreth_budget = 256;
};

struct ProjectionResult {
  Eigen::VectorXd x;
  int sweeps = 0;
  double max_violation = 0.0;
  bool used_fallback = false;
};

/// argmin ||x - y|| over the polyhedron by Hildreth's dual coordinate ascent,
/// finished by an exact solve on the detected active set. When `feasible`
/// points to a feasible point and the dual method has not finished within
/// the sweep budget, a primal active-set method started there takes over.
/// Throws EmptyFeasibleSet when the dual iterates diverge or the sweeps run
/// out with a violation left.
ProjectionResult project_feasible(const Eigen::VectorXd& y, const LinearConstraints& c,
                                  const ProjectionOptions& opts = {},
                                  const Eigen::VectorXd* feasible = nullptr);

}  // namespace cneumann
