#pragma once

// Independent reference values for the unit tests, computed with the C++17
// special functions of the standard library and Boost.Multiprecision rather
// than with the library under test.

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <cmath>
#include <stdexcept>

namespace oracle {

// Ascending series for J_m in 100 decimal digits. Cancellation at x = 50 costs
// about 22 digits, which leaves plenty.
inline double jn_series(int m, double xd) {
  using R = boost::multiprecision::cpp_dec_float_100;
  const R half = R(xd) / 2;
  R term = 1;
  for (int i = 1; i <= m; ++i) term *= half / i;
  R sum = term;
  const R q = -half * half;
  for (int k = 1; k < 2000; ++k) {
    term *= q / (R(k) * (k + m));
    sum += term;
    if (k > xd && abs(term) < R("1e-60")) break;
  }
  return sum.convert_to<double>();
}

inline double jn(int m, double x) { return std::cyl_bessel_j(static_cast<double>(m), x); }

inline double jn_prime(int m, double x) {
  if (m == 0) return -jn(1, x);
  return 0.5 * (jn(m - 1, x) - jn(m + 1, x));
}

// l-th positive zero of J_m' (for m = 0 the trivial zero at 0 counts as l = 1).
inline double jprime_zero(int m, int l) {
  int found = (m == 0) ? 1 : 0;
  if (found == l) return 0.0;
  const double step = 1e-3;
  double a = (m == 0) ? step : step;
  double fa = jn_prime(m, a);
  for (double b = a + step; b < 200.0; b += step) {
    const double fb = jn_prime(m, b);
    if ((fa < 0) != (fb < 0)) {
      if (++found == l) {
        double lo = b - step, hi = b, flo = fa;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = jn_prime(m, mid);
          if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        return 0.5 * (lo + hi);
      }
    }
    fa = fb;
  }
  throw std::runtime_error("oracle: zero not found");
}

// l-th positive zero of J_m by scanning and bisection.
inline double j_zero(int m, int l) {
  const double step = 1e-3;
  int found = 0;
  double fa = jn(m, step);
  for (double b = 2 * step; b < 200.0; b += step) {
    const double fb = jn(m, b);
    if ((fa < 0) != (fb < 0) && ++found == l) {
      double lo = b - step, hi = b, flo = fa;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = jn(m, mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    fa = fb;
  }
  throw std::runtime_error("oracle: zero not found");
}

}  // namespace oracle
