#include "cneumann/theory.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "cneumann/bessel.hpp"
#include "cneumann/errors.hpp"

namespace cneumann {

namespace {

constexpr double kPi = std::numbers::pi;

const double& mu_at(const std::vector<double>& mu, int k) {
  if (k < 0 || k >= static_cast<int>(mu.size())) {
    throw ConfigError("spectrum has no mu_" + std::to_string(k));
  }
  return mu[k];
}

BoundCheck finish(BoundCheck c, double fem_error) {
  c.slack = bound_slack(fem_error);
  c.pass = std::isfinite(c.margin) && c.margin >= -c.slack;
  if (!c.pass && c.hard) c.note = "violated beyond the discretization slack";
  return c;
}

}  // namespace

double j0_first_zero() {
  static const double z = j0_zero(1);
  return z;
}

double ckd_constant(int k) {
  if (k < 1) throw ConfigError("C_{k,2} needs k >= 1");
  return std::pow(2.0 * j0_first_zero() + (k - 1) * kPi, 2);
}

double bound_slack(double fem_error) { return std::max(0.05, 3.0 * std::abs(fem_error)); }

BoundCheck check_payne_weinberger(const ConvexPolygon& poly, const std::vector<double>& mu,
                                  double fem_error) {
  const double D = diameter(poly);
  BoundCheck c;
  c.name = "payne_weinberger";
  c.value = D * D * mu_at(mu, 1);
  c.bound = kPi * kPi;
  c.margin = c.value - c.bound;
  return finish(c, fem_error);
}

BoundCheck check_ckd(const ConvexPolygon& poly, const std::vector<double>& mu, int k,
                     double fem_error) {
  const double D = diameter(poly);
  BoundCheck c;
  c.name = "ckd_k" + std::to_string(k);
  c.value = D * D * mu_at(mu, k);
  c.bound = ckd_constant(k);
  c.margin = c.bound - c.value;
  return finish(c, fem_error);
}

BoundCheck check_perimeter_bound(const ConvexPolygon& poly, const std::vector<double>& mu, int k,
                                 double fem_error) {
  const double P = perimeter(poly);
  BoundCheck c;
  c.name = "perimeter_witness_k" + std::to_string(k);
  c.value = P * P * mu_at(mu, k);
  c.bound = std::pow((2.0 * k + 2.0) * kPi, 2);
  c.margin = c.value - c.bound;
  c.hard = false;
  c = finish(c, fem_error);
  if (!c.pass) c.note = "below the rectangle value";
  return c;
}

BoundCheck check_polya(const ConvexPolygon& poly, const std::vector<double>& mu, int k, bool hard,
                       double fem_error) {
  BoundCheck c;
  c.name = "polya_k" + std::to_string(k);
  c.value = mu_at(mu, k);
  c.bound = 4.0 * kPi * k / area(poly);
  c.margin = c.bound - c.value;
  c.hard = hard;
  return finish(c, fem_error);
}

bool BoundReport::hard_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return !c.hard || c.pass; });
}

BoundReport bound_report(const std::string& shape_id, const ConvexPolygon& poly,
                         const std::vector<double>& mu, int k, double fem_error) {
  BoundReport r;
  r.shape_id = shape_id;
  r.diameter = diameter(poly);
  r.perimeter = perimeter(poly);
  r.area = area(poly);
  r.mu = mu;
  const int top = static_cast<int>(mu.size()) - 1;
  if (top >= 1) r.checks.push_back(check_payne_weinberger(poly, mu, fem_error));
  for (int j = 1; j <= top; ++j) r.checks.push_back(check_ckd(poly, mu, j, fem_error));
  if (k >= 1 && k <= top) r.checks.push_back(check_perimeter_bound(poly, mu, k, fem_error));
  for (int j = 1; j <= top; ++j) r.checks.push_back(check_polya(poly, mu, j, false, fem_error));
  return r;
}

void write_bound_markdown(std::ostream& os, const std::vector<BoundReport>& reports) {
  os << std::setprecision(6);
  for (const auto& r : reports) {
    os << "## " << r.shape_id << "\n\n";
    os << "D = " << r.diameter << ", P = " << r.perimeter << ", area = " << r.area << "\n\n";
    os << "mu:";
    for (double m : r.mu) os << ' ' << m;
    os << "\n\n";
    os << "| check | value | reference | margin | slack | kind | result | note |\n";
    os << "|---|---|---|---|---|---|---|---|\n";
    for (const auto& c : r.checks) {
      os << "| " << c.name << " | " << c.value << " | " << c.bound << " | " << c.margin << " | "
         << c.slack << " | " << (c.hard ? "hard" : "report") << " | " << (c.pass ? "pass" : "FAIL")
         << " | " << c.note << " |\n";
    }
    os << "\n";
  }
}

void write_bound_csv(std::ostream& os, const std::vector<BoundReport>& reports) {
  os << std::setprecision(12);
  os << "shape,D,P,area,check,value,reference,margin,slack,hard,pass\n";
  for (const auto& r : reports) {
    for (const auto& c : r.checks) {
      os << r.shape_id << ',' << r.diameter << ',' << r.perimeter << ',' << r.area << ',' << c.name
         << ',' << c.value << ',' << c.bound << ',' << c.margin << ',' << c.slack << ','
         << (c.hard ? 1 : 0) << ',' << (c.pass ? 1 : 0) << '\n';
    }
  }
}

}  // namespace cneumann
