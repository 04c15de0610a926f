#pragma once

// Known inequalities for Neumann eigenvalues of convex planar domains, checked
// against computed spectra with a discretization slack.

#include <iosfwd>
#include <string>
#include <vector>

#include "cneumann/geometry.hpp"

namespace cneumann {

/// First positive zero of J_0.
double j0_first_zero();

/// (2 j_{0,1} + (k - 1) pi)^2, the supremum of D^2 mu_k over convex sets.
double ckd_constant(int k);

/// Additive slack for strict inequalities: max(0.05, 3 * fem_error).
double bound_slack(double fem_error);

struct BoundCheck {
  std::string name;
  double value = 0.0;   // the computed quantity
  double bound = 0.0;   // the reference value
  double margin = 0.0;  // signed so that margin >= -slack means the check passes
  double slack = 0.0;
  bool hard = true;     // false for comparisons that are reported only
  bool pass = false;
  std::string note;
};

/// D^2 mu_1 > pi^2; margin D^2 mu_1 - pi^2.
BoundCheck check_payne_weinberger(const ConvexPolygon& poly, const std::vector<double>& mu,
                                  double fem_error = 0.0);

/// D^2 mu_k < C_{k,2}; margin C_{k,2} - D^2 mu_k.
BoundCheck check_ckd(const ConvexPolygon& poly, const std::vector<double>& mu, int k,
                     double fem_error = 0.0);

/// P^2 mu_k against the rectangle value (2k + 2)^2 pi^2 attained by
/// [0, k] x [0, 1]; margin P^2 mu_k - (2k + 2)^2 pi^2. Reported only.
BoundCheck check_perimeter_bound(const ConvexPolygon& poly, const std::vector<double>& mu, int k,
                                 double fem_error = 0.0);

/// mu_k <= 4 pi k / |K|; margin 4 pi k / |K| - mu_k. Proved for tiling
/// domains and the disk, so `hard` is left to the caller.
BoundCheck check_polya(const ConvexPolygon& poly, const std::vector<double>& mu, int k,
                       bool hard, double fem_error = 0.0);

struct BoundReport {
  std::string shape_id;
  double diameter = 0.0;
  double perimeter = 0.0;
  double area = 0.0;
  std::vector<double> mu;
  std::vector<BoundCheck> checks;

  bool hard_pass() const;
};

/// Payne-Weinberger, C_{k,2} for every computed k >= 1 and the perimeter
/// comparison for `k`, with the slack derived from fem_error. Pólya rows are
/// added (reported only) for every computed k.
BoundReport bound_report(const std::string& shape_id, const ConvexPolygon& poly,
                         const std::vector<double>& mu, int k, double fem_error = 0.0);

void write_bound_markdown(std::ostream& os, const std::vector<BoundReport>& reports);
void write_bound_csv(std::ostream& os, const std::vector<BoundReport>& reports);

}  // namespace cneumann
