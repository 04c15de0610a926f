#include "cneumann/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cneumann/errors.hpp"

namespace cneumann {

namespace {

constexpr double kPi = std::numbers::pi;

long double series_j(int m, long double x) {
  const long double half = x / 2.0L;
  long double term = 1.0L;
  for (int i = 1; i <= m; ++i) term *= half / i;
  long double sum = term;
  const long double q = -half * half;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<long double>(k) * (k + m));
    sum += term;
    if (std::fabs(term) <= 1e-22L * std::fabs(sum) && k > half) break;
  }
  return sum;
}

// Miller's backward recurrence, normalized with J_0 + 2 sum J_{2k} = 1.
long double miller_j(int m, long double x) {
  int start = static_cast<int>(std::max<long double>(m, x)) + 40 +
              static_cast<int>(3.0L * std::sqrt(std::max<long double>(m, x)));
  if (start % 2) ++start;
  long double next = 0.0L, cur = 1e-300L, result = 0.0L, norm = 0.0L;
  for (int n = start; n >= 1; --n) {
    const long double prev = (2.0L * n / x) * cur - next;  // J_{n-1}
    next = cur;
    cur = prev;
    if (n - 1 == m) result = cur;
    if ((n - 1) % 2 == 0 && n - 1 > 0) norm += 2.0L * cur;
    if (std::fabs(cur) > 1e300L) {
      cur *= 1e-300L;
      next *= 1e-300L;
      result *= 1e-300L;
      norm *= 1e-300L;
    }
  }
  norm += cur;  // J_0
  if (m == 0) result = cur;
  return result / norm;
}

}  // namespace

double bessel_j(int m, double x) {
  if (m < 0) throw ConfigError("Bessel order must be nonnegative");
  if (x < 0.0) throw ConfigError("Bessel argument must be nonnegative");
  if (x == 0.0) return m == 0 ? 1.0 : 0.0;
  if (x <= 12.0) return static_cast<double>(series_j(m, x));
  return static_cast<double>(miller_j(m, x));
}

double bessel_j_prime(int m, double x) {
  if (m == 0) return -bessel_j(1, x);
  return 0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x));
}

double bessel_j_second(int m, double x) {
  return -bessel_j_prime(m, x) / x - (1.0 - static_cast<double>(m) * m / (x * x)) * bessel_j(m, x);
}

BesselZero jprime_zero(int m, int l) {
  if (m < 0 || l < 1) throw ConfigError("jprime_zero needs m >= 0 and l >= 1");
  if (m == 0 && l == 1) return {0, 1, 0.0};
  int found = (m == 0) ? 1 : 0;
  const double step = 0.05;
  double a = 1e-6;
  double fa = bessel_j_prime(m, a);
  for (int guard = 0; guard < 100000; ++guard) {
    const double b = a + step;
    const double fb = bessel_j_prime(m, b);
    if (fa == 0.0 || (fa < 0.0) != (fb < 0.0)) {
      if (++found == l) {
        double lo = a, hi = b, flo = fa;
        for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = bessel_j_prime(m, mid);
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        double x = 0.5 * (lo + hi);
        for (int it = 0; it < 8; ++it) {
          const double dx = bessel_j_prime(m, x) / bessel_j_second(m, x);
          if (!std::isfinite(dx)) break;
          x -= dx;
          if (std::abs(dx) < 1e-16 * x) break;
        }
        if (!(x > lo - 1e-8 && x < hi + 1e-8)) {
          throw BracketFailure("Newton polish left the bracket for j'_{" + std::to_string(m) + "," +
                               std::to_string(l) + "}");
        }
        return {m, l, x};
      }
    }
    a = b;
    fa = fb;
  }
  throw BracketFailure("no sign change found for j'_{" + std::to_string(m) + "," +
                       std::to_string(l) + "}");
}

double j0_zero(int l) {
  if (l < 1) throw ConfigError("j0_zero needs l >= 1");
  // J_0 has its l-th zero in ((l - 1/4) pi - 1, (l - 1/4) pi + 1)
  const double guess = (l - 0.25) * kPi;
  double lo = guess - 1.0, hi = guess + 1.0;
  double flo = bessel_j(0, std::max(lo, 1e-9));
  if ((flo < 0.0) == (bessel_j(0, hi) < 0.0)) throw BracketFailure("J_0 zero not bracketed");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = bessel_j(0, mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) x += bessel_j(0, x) / bessel_j(1, x);
  return x;
}

std::vector<DiskEigenvalue> disk_spectrum(int count) {
  // Eigenvalues below the bound are all found once both families are
  // scanned past it; grow the bound until enough are collected.
  for (double bound = 10.0;; bound *= 1.5) {
    std::vector<DiskEigenvalue> out;
    for (int m = 0;; ++m) {
      const double first = jprime_zero(m, m == 0 ? 2 : 1).value;
      if (first * first > bound) break;
      for (int l = (m == 0 ? 2 : 1);; ++l) {
        const double z = jprime_zero(m, l).value;
        if (z * z > bound) break;
        out.push_back({z * z, m, l, m == 0 ? 1 : 2});
      }
    }
    std::sort(out.begin(), out.end(),
              [](const DiskEigenvalue& a, const DiskEigenvalue& b) { return a.mu < b.mu; });
    int total = 0;
    for (const auto& e : out) total += e.multiplicity;
    if (total >= count) return out;
  }
}

std::vector<double> disk_eigenvalues(int count) {
  std::vector<double> mu;
  for (const auto& e : disk_spectrum(count)) {
    for (int r = 0; r < e.multiplicity; ++r) mu.push_back(e.mu);
  }
  mu.resize(count);
  return mu;
}

double FourierPerturbation::operator()(double theta) const {
  double v = alpha0;
  for (const auto& [p, a] : alpha) v += a * std::cos(p * theta);
  for (const auto& [p, b] : beta) v += b * std::sin(p * theta);
  return v;
}

double FourierPerturbation::a(int p) const {
  auto it = alpha.find(p);
  return it == alpha.end() ? 0.0 : it->second;
}

double FourierPerturbation::b(int p) const {
  auto it = beta.find(p);
  return it == beta.end() ? 0.0 : it->second;
}

double lambda1(int m, double omega0, const FourierPerturbation& f) {
  const double w2 = omega0 * omega0;
  const double mm = static_cast<double>(m) * m;
  return -w2 * (2.0 * f.alpha0 + (mm + w2) / std::abs(mm - w2) * std::hypot(f.a(2 * m), f.b(2 * m)));
}

double disk_normalization_sq(int m, double omega0) {
  const double j = bessel_j(m, omega0);
  if (m == 0) return 1.0 / (kPi * j * j);
  const double w2 = omega0 * omega0;
  return 2.0 * w2 / ((w2 - static_cast<double>(m) * m) * kPi * j * j);
}

Matrix2 disk_cluster_matrix(int m, double omega0, const FourierPerturbation& f) {
  const double j = bessel_j(m, omega0);
  const double scale = disk_normalization_sq(m, omega0) * kPi * j * j;
  const double w2 = omega0 * omega0;
  const double mm = static_cast<double>(m) * m;
  const double half = 0.5 * (mm + w2);
  Matrix2 out;
  out.a11 = scale * ((mm - w2) * f.alpha0 - half * f.a(2 * m));
  out.a22 = scale * ((mm - w2) * f.alpha0 + half * f.a(2 * m));
  out.a12 = scale * (-half * f.b(2 * m));
  return out;
}

double disk_ck(int k, double omega0) {
  const int n = 2 * k + 1;
  return omega0 * (k * k + k) -
         omega0 * omega0 * bessel_j(n, omega0) / (2.0 * bessel_j_prime(n, omega0));
}

SecondOrder omega2(int l, const FourierPerturbation& f) {
  if (l < 2) throw InvalidPerturbation("the simple disk eigenvalue needs l >= 2");
  for (const auto* coeffs : {&f.alpha, &f.beta}) {
    for (const auto& [p, v] : *coeffs) {
      if (v != 0.0 && p >= 2 && p % 2 == 0) {
        throw InvalidPerturbation("even harmonic " + std::to_string(p) + " is not allowed");
      }
    }
  }
  SecondOrder s;
  s.omega0 = jprime_zero(0, l).value;
  s.omega1 = -f.alpha0 * s.omega0;
  s.omega2 = f.alpha0 * f.alpha0 * s.omega0;
  for (int p = 3;; p += 2) {
    const double amp = f.a(p) * f.a(p) + f.b(p) * f.b(p);
    const bool more = std::any_of(f.alpha.begin(), f.alpha.end(), [&](auto& e) { return e.first > p; }) ||
                      std::any_of(f.beta.begin(), f.beta.end(), [&](auto& e) { return e.first > p; });
    if (amp > 0.0) {
      const int k = (p - 1) / 2;
      const double ck = disk_ck(k, s.omega0);
      s.c[k] = ck;
      s.omega2 += ck * amp;
    }
    if (!more) break;
  }
  return s;
}

double second_order_d2mu(const SecondOrder& s, const FourierPerturbation& f) {
  return 8.0 * (s.omega0 * s.omega2 - f.alpha0 * f.alpha0 * s.omega0 * s.omega0);
}

namespace {

// Piecewise-linear interpolant of g on a uniform periodic grid over [0, 2 pi).
double pl_interp(const std::vector<double>& nodes, double x) {
  const int n = static_cast<int>(nodes.size());
  const double h = 2.0 * kPi / n;
  double s = std::fmod(x, 2.0 * kPi);
  if (s < 0.0) s += 2.0 * kPi;
  const double u = s / h;
  const int i = std::min(static_cast<int>(u), n - 1);
  const double t = u - i;
  return (1.0 - t) * nodes[i] + t * nodes[(i + 1) % n];
}

struct CutPerturbation {
  std::vector<double> raw;  // nodes of min(0, c - cos x)
  std::vector<double> psi;  // nodes of cos x
  double scale = 1.0;
  double t = 0.0;

  // phi as a function of x = 2 m theta
  double phi(double x) const { return scale * pl_interp(raw, x) - t * pl_interp(psi, x); }
};

CutPerturbation make_cut(double c, int nodes) {
  CutPerturbation cp;
  cp.raw.resize(nodes);
  cp.psi.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    const double x = 2.0 * kPi * i / nodes;
    cp.raw[i] = std::min(0.0, c - std::cos(x));
    cp.psi[i] = std::cos(x);
  }
  // Fourier cosine coefficient of PL(min(c, cos)) = PL(cos) + raw; scale the
  // cut so the truncated profile alone would carry a unit first harmonic,
  // then remove the first harmonic of phi with the PL cosine.
  const int q = 8192;
  double a_cut = 0.0, r_cos = 0.0, p_cos = 0.0;
  for (int i = 0; i < q; ++i) {
    const double x = 2.0 * kPi * (i + 0.5) / q;
    const double cx = std::cos(x);
    a_cut += (pl_interp(cp.psi, x) + pl_interp(cp.raw, x)) * cx;
    r_cos += pl_interp(cp.raw, x) * cx;
    p_cos += pl_interp(cp.psi, x) * cx;
  }
  const double a = a_cut / (q / 2.0);
  cp.scale = 1.0 / a;
  cp.t = cp.scale * r_cos / p_cos;
  return cp;
}

}  // namespace

ImprovingPerturbation improving_perturbation_multiple(int m, int l) {
  if (m < 1) throw ConfigError("the double disk eigenvalues have m >= 1");
  ImprovingPerturbation best;
  best.first_order = std::numeric_limits<double>::infinity();
  const double omega0 = jprime_zero(m, l).value;
  const int nodes = 64;
  const int q = 8192;
  for (int step = 0; step <= 19; ++step) {
    const double c = 0.05 * step;
    const CutPerturbation cp = make_cut(c, nodes);
    auto f = [cp, m](double theta) {
      const double x = 2.0 * m * theta;
      return std::cos(x) + cp.phi(x);
    };
    // coefficients and M_f on a fine grid of one period in theta
    double mean = 0.0, a2m = 0.0, b2m = 0.0, sup = -1e300;
    for (int i = 0; i < q; ++i) {
      const double th = 2.0 * kPi * (i + 0.5) / q;
      const double v = f(th);
      mean += v / q;
      a2m += v * std::cos(2.0 * m * th) * 2.0 / q;
      b2m += v * std::sin(2.0 * m * th) * 2.0 / q;
      const double th0 = kPi * i / q;
      sup = std::max(sup, f(th0) + f(th0 + kPi));
    }
    FourierPerturbation fp;
    fp.alpha0 = mean;
    fp.alpha[2 * m] = a2m;
    fp.beta[2 * m] = b2m;
    const double lam = lambda1(m, omega0, fp);
    const double slope = 4.0 * (sup * omega0 * omega0 + lam);
    if (slope < best.first_order) {
      best.multiple = true;
      best.m = m;
      best.l = l;
      best.omega0 = omega0;
      best.f = f;
      best.fourier = fp;
      best.mf = sup;
      best.lambda1 = lam;
      best.first_order = slope;
    }
  }
  return best;
}

ImprovingPerturbation improving_perturbation_simple(int l) {
  ImprovingPerturbation out;
  out.multiple = false;
  out.l = l;
  FourierPerturbation fp;
  fp.alpha[3] = 1.0;
  fp.beta[3] = 1.0;
  const SecondOrder s = omega2(l, fp);
  out.omega0 = s.omega0;
  out.fourier = fp;
  out.f = [fp](double th) { return fp(th); };
  out.mf = 0.0;  // odd harmonics: f(theta) + f(theta + pi) = 0
  out.first_order = 0.0;
  out.second_order = second_order_d2mu(s, fp);
  return out;
}

}  // namespace cneumann
