#pragma once

// Verification studies that compare the solvers with closed forms and with
// each other, and the named suites of the `verify` subcommand built on them.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cneumann/fem.hpp"
#include "cneumann/sturm_liouville.hpp"

namespace cneumann {

struct AnalyticRow {
  std::string shape;
  int index = 0;  // k of mu_k
  double computed = 0.0;
  double exact = 0.0;
  double rel_error() const;
};

/// Unit square mu_1..mu_3, rectangles [0,k] x [0,1] mu_k for k = 2..5 and the
/// first nine nonzero eigenvalues of a regular 256-gon inscribed in the unit
/// circle against j'_{m,l}^2.
std::vector<AnalyticRow> analytic_spectra(double target_h = 0.02, Element element = Element::P2);

struct GradientSample {
  int k = 0;
  int coordinates = 0;
  int agreeing = 0;        // |fd - g| <= rel_tol max(|fd|, |g|)
  int boundary_agreeing = 0;  // the same for the boundary form of the gradient
  double max_rel_error = 0.0;
  double euler = 0.0;      // sum q_j dmu/dq_j
  double mu = 0.0;
};

struct GradientStudy {
  std::vector<GradientSample> shapes;
  double agree_fraction() const;
};

/// Analytic against central-difference gradients of the first simple mu_k
/// (k <= 4) on random smooth convex bodies. Difference quotients move the
/// mesh with deform(); the analytic gradient is the discrete volume form,
/// and the boundary form is scored alongside.
GradientStudy support_gradient_study(int shapes = 10, int n = 64, unsigned seed = 1,
                                     double target_h = 0.04, double delta = 1e-5,
                                     double rel_tol = 1e-3);

/// Euler sums of gauge gradients on random bodies; each should equal
/// +2 mu_k since mu is homogeneous of degree 2 in gamma.
GradientStudy gauge_euler_study(int shapes = 10, int n = 64, unsigned seed = 2, double target_h = 0.04);

struct Lambda1Study {
  int m = 1;
  int l = 1;
  double formula = 0.0;
  std::vector<double> eps;
  std::vector<double> quotients;  // (mu(eps) - mu(0)) / eps
  double extrapolated = 0.0;      // Richardson on the two smallest eps
  double rel_error() const;
};

/// Lower branch of the double eigenvalue j'_{1,1}^2 under the support
/// perturbation 1 + eps (0.2 + cos 2t + 0.5 sin 2t).
Lambda1Study disk_lambda1_study(int n = 256, double target_h = 0.04);

struct Omega2Study {
  int l = 2;
  double formula = 0.0;
  double fitted = 0.0;  // eps^2 coefficient of a least-squares fit a + b eps^2 + c eps^4
  std::vector<double> eps;
  std::vector<double> sqrt_mu;
  double rel_error() const;
};

/// sqrt(mu) of the radial eigenvalue j'_{0,l}^2 under 1 + eps (cos 3t + sin 3t).
Omega2Study disk_omega2_study(int l = 2, int n = 256, double target_h = 0.04);

struct RatioSignRow {
  int l = 0;
  double omega0 = 0.0;
  double lhs = 0.0;   // omega0 / 4 - J_3'(omega0) / J_3(omega0)
  double rhs = 0.0;   // omega0^2 - 6
  bool signs_agree() const { return (lhs > 0) == (rhs > 0) && (lhs < 0) == (rhs < 0); }
};

std::vector<RatioSignRow> ratio_sign_table(int l_min = 2, int l_max = 6);

struct ThinRectangleRow {
  double eps = 0.0;  // rectangle [0,1] x [0,eps]
  double d2mu1 = 0.0;
  double p2mu1 = 0.0;
};

/// FEM values of D^2 mu_1 and P^2 mu_1 on rectangles of decreasing height.
std::vector<ThinRectangleRow> thin_rectangle_sequence(const std::vector<double>& eps = {0.5, 0.25, 0.1, 0.05,
                                                                                        0.02});

// ---------------------------------------------------------------------------
// Suites of the verify subcommand.

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<VerifyCheck> checks;
  std::string tables;  // Markdown produced along the way
  bool passed() const;
};

struct VerifyOptions {
  std::optional<Profile> profile;  // collapse suite; tent when absent
  int k = 1;                       // collapse suite
  unsigned seed = 1;
};

/// analytic, bessel, disk, gradients, sl, collapse, theory, inertia
const std::vector<std::string>& suite_names();

/// Throws ConfigError for an unknown suite.
SuiteReport run_suite(const std::string& name, const VerifyOptions& opts = {});

void write_verify_markdown(std::ostream& os, const std::vector<SuiteReport>& reports);

}  // namespace cneumann
