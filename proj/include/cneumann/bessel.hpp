#pragma once

// Bessel functions of the first kind, zeros of J_m', the Neumann spectrum of
// the unit disk and the perturbation formulas for disk eigenvalues.

#include <functional>
#include <map>
#include <vector>

namespace cneumann {

/// J_m(x) for integer m >= 0 and x >= 0.
double bessel_j(int m, double x);
/// J_m'(x).
double bessel_j_prime(int m, double x);
/// J_m''(x) from the Bessel equation (x > 0).
double bessel_j_second(int m, double x);

struct BesselZero {
  int m = 0;
  int l = 0;
  double value = 0.0;
};

/// l-th zero of J_m'. For m = 0 the trivial zero x = 0 is counted as l = 1,
/// so the radial family of the disk starts at l = 2.
BesselZero jprime_zero(int m, int l);

/// l-th positive zero of J_0.
double j0_zero(int l);

struct DiskEigenvalue {
  double mu = 0.0;
  int m = 0;
  int l = 0;
  int multiplicity = 1;
};

/// Distinct nonzero Neumann eigenvalues of the unit disk in increasing order,
/// enough of them to cover the first `count` eigenvalues with multiplicity.
std::vector<DiskEigenvalue> disk_spectrum(int count);

/// mu_1 .. mu_count of the unit disk counted with multiplicity.
std::vector<double> disk_eigenvalues(int count);

/// Boundary perturbation of the unit disk: the support function becomes
/// 1 + eps f(theta) with f = alpha_0 + sum_p alpha_p cos(p theta) + beta_p sin(p theta).
struct FourierPerturbation {
  double alpha0 = 0.0;
  std::map<int, double> alpha;
  std::map<int, double> beta;

  double operator()(double theta) const;
  double a(int p) const;
  double b(int p) const;
};

/// Smallest eigenvalue of the first-order cluster matrix for the double
/// eigenvalue omega0^2 = j'_{m,l}^2:
///   -omega0^2 (2 alpha_0 + (m^2 + omega0^2) / |m^2 - omega0^2| sqrt(alpha_2m^2 + beta_2m^2)).
double lambda1(int m, double omega0, const FourierPerturbation& f);

/// Closed-form cluster matrix for u_1 = A J_m(w r) cos(m t), u_2 = A J_m(w r) sin(m t)
/// with ||u_i|| = 1, integrated against f.
struct Matrix2 {
  double a11 = 0, a12 = 0, a22 = 0;
};
Matrix2 disk_cluster_matrix(int m, double omega0, const FourierPerturbation& f);

/// A^2 of the L2-normalized eigenfunction A J_m(w r) cos(m t) (m >= 1) or
/// A J_0(w r) (m = 0).
double disk_normalization_sq(int m, double omega0);

struct SecondOrder {
  double omega0 = 0.0;
  double omega1 = 0.0;
  double omega2 = 0.0;
  std::map<int, double> c;  // c_k keyed by k (harmonic 2k + 1)
};

double disk_ck(int k, double omega0);

/// Expansion sqrt(mu(eps)) = omega0 + eps omega1 + eps^2 omega2 for the simple
/// eigenvalue j'_{0,l}^2 (l >= 2). Throws InvalidPerturbation when f has an
/// even harmonic of order >= 2.
SecondOrder omega2(int l, const FourierPerturbation& f);

/// Coefficient of eps^2 in D^2 mu for the simple case: 8 (omega0 omega2 - alpha0^2 omega0^2).
double second_order_d2mu(const SecondOrder& s, const FourierPerturbation& f);

struct ImprovingPerturbation {
  bool multiple = false;
  int m = 0;
  int l = 0;
  double omega0 = 0.0;
  std::function<double(double)> f;  // exact perturbation
  FourierPerturbation fourier;      // alpha0, alpha_2m, beta_2m (multiple) or harmonic 3 (simple)
  double mf = 0.0;                  // sup_theta f(theta) + f(theta + pi)
  double lambda1 = 0.0;             // multiple case
  double first_order = 0.0;         // coefficient of eps in D^2 mu
  double second_order = 0.0;        // coefficient of eps^2 in D^2 mu (simple case)
};

/// Double eigenvalue j'_{m,l}^2: f = cos(2 m theta) + phi with phi a pi/m
/// periodic piecewise affine function orthogonal to cos(2 m theta) that cuts
/// the maxima; the cut level is chosen to minimize the first-order slope
/// 4 (M_f omega0^2 + lambda1).
ImprovingPerturbation improving_perturbation_multiple(int m, int l);

/// Simple eigenvalue j'_{0,l}^2: alpha_3 = beta_3 = 1.
ImprovingPerturbation improving_perturbation_simple(int l);

}  // namespace cneumann
