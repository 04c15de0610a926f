#pragma once

// Weighted one-dimensional Neumann problem -(h u')' = mu h u on [0, 1] with
// h(0) u'(0) = h(1) u'(1) = 0, the limit of eigenvalues on thin domains
// {0 <= y <= eps h(x)}, and the moment-of-inertia ratio behind the
// three-dimensional perimeter argument.

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cneumann/fem.hpp"
#include "cneumann/geometry.hpp"

namespace cneumann {

/// Samples of h on the uniform grid x_j = j / (size - 1).
struct Profile {
  std::vector<double> h;

  static Profile sample(const std::function<double(double)>& f, int intervals);
  int intervals() const { return static_cast<int>(h.size()) - 1; }
  double x(int j) const { return static_cast<double>(j) / intervals(); }
  /// Linear interpolation between samples.
  double operator()(double x) const;

  /// h_{j-1} - 2 h_j + h_{j+1} <= tol for all interior j.
  bool is_concave(double tol = 1e-9) const;
  /// h / max h.
  Profile normalized() const;
  /// The same piecewise linear function sampled on a finer uniform grid.
  Profile resampled(int intervals) const;
};

/// Reads "x h" pairs (one per line, '#' comments allowed) with increasing x
/// spanning [0, 1]; unevenly spaced input is interpolated onto a uniform grid
/// with the same number of points.
Profile read_profile(std::istream& is);

inline constexpr double kWeightFloor = 1e-12;

struct SLSpectrum {
  std::vector<double> mu;   // mu_0 = 0, ascending
  Eigen::MatrixXd vectors;  // nodal values, one column per eigenvalue

  int size() const { return static_cast<int>(mu.size()); }
  /// Number of strict sign changes of the k-th eigenfunction.
  int sign_changes(int k) const;
  /// Lengths of the nodal intervals of the k-th eigenfunction, zeros located
  /// by linear interpolation.
  std::vector<double> nodal_lengths(int k) const;
};

/// mu_0..mu_K of the P1 discretization  int h u' v' = mu int h u v  on the
/// profile grid. The mass matrix is the average of the consistent and the
/// lumped weighted mass, which cancels the leading dispersion error of P1.
/// Weights are floored at kWeightFloor; throws DegenerateWeight when h
/// vanishes on a whole grid interval.
SLSpectrum sl_eigs(const Profile& profile, int K);

struct LowerBoundRow {
  int k = 0;
  double mu = 0.0;
  double bound = 0.0;      // (k pi)^2
  double margin = 0.0;     // mu / bound - 1
  bool holds = false;      // margin >= -rel_tol
  std::vector<double> nodal_lengths;
};

/// mu_k(h) >= (k pi)^2 for k = 1..K, checked with relative tolerance rel_tol.
std::vector<LowerBoundRow> sl_lower_bound_check(const Profile& profile, int K,
                                                double rel_tol = 1e-4);

struct CollapseRow {
  double eps = 0.0;
  double mu = 0.0;     // FEM eigenvalue of the thin domain
  double gap = 0.0;    // mu - limit
  int triangles = 0;
  bool skipped = false;
  std::string note;
};

struct CollapseTable {
  int k = 0;
  double limit = 0.0;  // mu_k of the profile
  std::vector<CollapseRow> rows;
  /// |gap| does not increase as eps decreases over the computed rows.
  bool monotone = false;
};

/// {0 <= x <= 1, 0 <= y <= eps h(x)} as a convex polygon; the profile is
/// resampled with `segments` pieces and collinear top vertices are dropped.
ConvexPolygon thin_domain(const Profile& profile, double eps, int segments = 64);

CollapseTable collapse_experiment(const Profile& profile, int k,
                                  const std::vector<double>& eps_list = {0.2, 0.1, 0.05, 0.025},
                                  int segments = 64, Element element = Element::P2);

void write_collapse_csv(std::ostream& os, const CollapseTable& table);

/// int h r^3 dr / int h r dr over [0, R] for h piecewise linear on a uniform
/// grid, integrated exactly.
double inertia_ratio(const std::vector<double>& h, double R);

struct InertiaReport {
  double R = 1.0;
  double target = 0.0;         // 3 R^2 / 10
  double linear_ratio = 0.0;   // h = 1 - r / R
  double constant_ratio = 0.0; // h = 1
  /// Minimum over the extreme profiles min(1, (R - r) / (R - a)), a on the grid.
  double extreme_min = 0.0;
  double extreme_argmin = 0.0;  // the knot a of the minimizer
  int random_samples = 0;
  double random_min = 0.0;
  /// sup |h - (1 - r/R)| of the best random profile.
  double random_best_distance = 0.0;
  int below_target = 0;        // random profiles with ratio < target - 1e-6
};

/// Brute-force check of the inertia minimum over nonnegative, concave,
/// nonincreasing profiles with h(0) = 1.
InertiaReport inertia_ratio_check(double R, int grid, int random_samples = 10000,
                                  unsigned seed = 1);

}  // namespace cneumann
