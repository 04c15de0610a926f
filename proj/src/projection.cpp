#include "cneumann/projection.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "cneumann/errors.hpp"

namespace cneumann {

void LinearConstraints::add(std::vector<std::pair<int, double>> row, double b) {
  rows.push_back(std::move(row));
  rhs.push_back(b);
}

Eigen::VectorXd LinearConstraints::slack(const Eigen::VectorXd& x) const {
  Eigen::VectorXd s(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    double v = -rhs[j];
    for (const auto& [i, a] : rows[j]) v += a * x[i];
    s[j] = v;
  }
  return s;
}

double LinearConstraints::max_violation(const Eigen::VectorXd& x) const {
  return rows.empty() ? 0.0 : std::max(0.0, slack(x).maxCoeff());
}

LinearConstraints support_constraints(int n) {
  LinearConstraints c;
  c.dim = n;
  const double two_cos = 2.0 * std::cos(2.0 * std::acos(-1.0) / n);
  // -rho_i <= 0, in the units of rho so that the tolerance matches the
  // polygon reconstruction check
  const double s = 1.0 / (2.0 - two_cos);
  for (int i = 0; i < n; ++i) {
    c.add({{wrap_index(i - 1, n), -s}, {i, two_cos * s}, {wrap_index(i + 1, n), -s}}, 0.0);
  }
  return c;
}

LinearConstraints support_constraints(int n, const WidthBounds& widths) {
  LinearConstraints c = support_constraints(n);
  const int half = n / 2;
  if (static_cast<int>(widths.upper.size()) != half || static_cast<int>(widths.lower.size()) != half) {
    throw ConfigError("width bounds need N/2 entries");
  }
  for (int i = 0; i < half; ++i) {
    if (widths.lower[i] > widths.upper[i]) {
      throw EmptyFeasibleSet("width " + std::to_string(i) + " has lower bound " +
                             std::to_string(widths.lower[i]) + " above upper bound " +
                             std::to_string(widths.upper[i]));
    }
    c.add({{i, 1.0}, {i + half, 1.0}}, widths.upper[i]);
    if (widths.lower[i] > 0.0) c.add({{i, -1.0}, {i + half, -1.0}}, -widths.lower[i]);
  }
  return c;
}

LinearConstraints gauge_constraints(int n, double gamma_min) {
  LinearConstraints c;
  c.dim = n;
  const double two_cos = 2.0 * std::cos(2.0 * std::acos(-1.0) / n);
  for (int i = 0; i < n; ++i) {
    c.add({{wrap_index(i - 1, n), -1.0}, {i, two_cos}, {wrap_index(i + 1, n), -1.0}}, 0.0);
  }
  for (int i = 0; i < n; ++i) c.add({{i, -1.0}}, -gamma_min);
  return c;
}

namespace {

// Exact projection onto {a_j . x = b_j, j in W}. Returns false when the
// normal equations are inconsistent.
bool solve_on(const Eigen::VectorXd& y, const LinearConstraints& c, const std::vector<int>& w,
              Eigen::VectorXd& x, Eigen::VectorXd& lambda) {
  const int m = static_cast<int>(w.size());
  if (m == 0) {
    x = y;
    lambda.resize(0);
    return true;
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, c.dim);
  Eigen::VectorXd b(m);
  for (int r = 0; r < m; ++r) {
    for (const auto& [i, a] : c.rows[w[r]]) A(r, i) += a;
    b[r] = c.rhs[w[r]];
  }
  const Eigen::MatrixXd G = A * A.transpose();
  const Eigen::VectorXd rhs = A * y - b;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(G);
  lambda = cod.solve(rhs);
  if ((G * lambda - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) return false;
  x = y - A.transpose() * lambda;
  return true;
}

// Active-set refinement started from the support of the Hildreth
// multipliers: drop rows with negative multipliers, add the most violated
// row, until the KKT conditions hold.
bool active_set_finish(const Eigen::VectorXd& y, const LinearConstraints& c,
                       std::vector<int> w, double tol, Eigen::VectorXd& out) {
  const int m = static_cast<int>(c.rows.size());
  Eigen::VectorXd x, lambda;
  for (int it = 0; it < 2 * m + 10; ++it) {
    if (!solve_on(y, c, w, x, lambda)) return false;
    if (lambda.size() > 0) {
      Eigen::Index r;
      const double lo = lambda.minCoeff(&r);
      if (lo < -1e-12 * (1.0 + lambda.cwiseAbs().maxCoeff())) {
        w.erase(w.begin() + r);
        continue;
      }
    }
    const Eigen::VectorXd s = c.slack(x);
    Eigen::Index j;
    if (s.maxCoeff(&j) <= tol) {
      out = x;
      return true;
    }
    if (std::find(w.begin(), w.end(), static_cast<int>(j)) != w.end()) return false;
    w.push_back(static_cast<int>(j));
  }
  return false;
}

// Primal active-set method for min ||z - y||^2 started at a feasible z. The
// working set is kept linearly independent through an orthonormal basis of
// its row space; steps move in the null space of the working rows.
bool primal_active_set(const Eigen::VectorXd& y, const LinearConstraints& c, Eigen::VectorXd z,
                       double tol, Eigen::VectorXd& out) {
  const int m = static_cast<int>(c.rows.size());
  const int n = c.dim;
  auto dense_row = [&](int j) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (const auto& [i, v] : c.rows[j]) a[i] += v;
    return a;
  };
  std::vector<int> w;
  Eigen::MatrixXd Q(n, 0);
  // orthonormal residual of row j against span(Q), or an empty vector
  auto residual = [&](int j) {
    Eigen::VectorXd a = dense_row(j);
    const double a0 = a.norm();
    for (int pass = 0; pass < 2; ++pass) a -= Q * (Q.transpose() * a);
    return a.norm() > 1e-8 * a0 ? Eigen::VectorXd(a.normalized()) : Eigen::VectorXd();
  };
  auto push = [&](int j) {
    const Eigen::VectorXd r = residual(j);
    if (r.size() == 0) return false;
    Q.conservativeResize(n, Q.cols() + 1);
    Q.col(Q.cols() - 1) = r;
    w.push_back(j);
    return true;
  };
  {
    const Eigen::VectorXd s = c.slack(z);
    for (int j = 0; j < m; ++j) {
      if (s[j] >= -tol) push(j);
    }
  }
  std::vector<char> in_w(m, 0);
  for (int j : w) in_w[j] = 1;

  for (int it = 0; it < 20 * m + 100; ++it) {
    const Eigen::VectorXd p = (y - z) - Q * (Q.transpose() * (y - z));
    if (p.norm() <= 1e-13 * (1.0 + z.norm() + y.norm())) {
      if (w.empty()) {
        out = z;
        return true;
      }
      const int k = static_cast<int>(w.size());
      Eigen::MatrixXd At(n, k);
      for (int r = 0; r < k; ++r) At.col(r) = dense_row(w[r]);
      // z - y + A^T lambda = 0
      const Eigen::VectorXd lambda = At.householderQr().solve(y - z);
      Eigen::Index r;
      if (lambda.minCoeff(&r) >= -1e-12 * (1.0 + lambda.cwiseAbs().maxCoeff())) {
        out = z;
        return c.max_violation(out) <= tol;
      }
      in_w[w[r]] = 0;
      w.erase(w.begin() + r);
      Q.resize(n, 0);
      std::vector<int> keep;
      keep.swap(w);
      for (int j : keep) push(j);
      continue;
    }
    double t = 1.0;
    int block = -1;
    std::vector<char> skip(m, 0);
    for (;;) {
      t = 1.0;
      block = -1;
      for (int j = 0; j < m; ++j) {
        if (in_w[j] || skip[j]) continue;
        double ap = 0.0, az = -c.rhs[j];
        for (const auto& [i, v] : c.rows[j]) {
          ap += v * p[i];
          az += v * z[i];
        }
        if (ap <= 0.0) continue;
        const double tj = std::max(0.0, -az / ap);
        if (tj < t) {
          t = tj;
          block = j;
        }
      }
      // a row in the span of the working set cannot block in exact
      // arithmetic; ignore it and look again
      if (block >= 0 && residual(block).size() == 0) {
        skip[block] = 1;
        continue;
      }
      break;
    }
    z += t * p;
    if (block >= 0) {
      push(block);
      in_w[block] = 1;
    }
  }
  return false;
}

}  // namespace

ProjectionResult project_feasible(const Eigen::VectorXd& y, const LinearConstraints& c,
                                  const ProjectionOptions& opts, const Eigen::VectorXd* feasible) {
  if (y.size() != c.dim) throw ConfigError("projection dimension mismatch");
  const double scale = 1.0 + y.cwiseAbs().maxCoeff();
  const double tol = opts.tol * scale;
  ProjectionResult res;
  res.x = y;
  if (c.max_violation(y) <= tol) {
    res.max_violation = c.max_violation(y);
    return res;
  }
  const int m = static_cast<int>(c.rows.size());
  std::vector<double> norm2(m), lambda(m, 0.0);
  for (int j = 0; j < m; ++j) {
    double s = 0.0;
    for (const auto& [i, a] : c.rows[j]) s += a * a;
    norm2[j] = s;
  }
  Eigen::VectorXd& x = res.x;
  const double lambda_cap = 1e12 * scale * scale;
  int next_finish = 8;
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    if (feasible && sweep > opts.hildreth_budget) {
      Eigen::VectorXd exact;
      if (primal_active_set(y, c, *feasible, tol, exact)) {
        res.x = exact;
        res.max_violation = c.max_violation(res.x);
        res.used_fallback = true;
        return res;
      }
      feasible = nullptr;
    }
    double moved = 0.0;
    for (int j = 0; j < m; ++j) {
      double v = -c.rhs[j];
      for (const auto& [i, a] : c.rows[j]) v += a * x[i];
      const double next = std::max(0.0, lambda[j] + v / norm2[j]);
      const double d = next - lambda[j];
      if (d != 0.0) {
        for (const auto& [i, a] : c.rows[j]) x[i] -= d * a;
        lambda[j] = next;
        moved = std::max(moved, std::abs(d) * std::sqrt(norm2[j]));
        if (next > lambda_cap) {
          throw EmptyFeasibleSet("dual variables diverge; the constraints are inconsistent");
        }
      }
    }
    res.sweeps = sweep;
    // Hildreth identifies the active set quickly but converges slowly on the
    // nearly dependent curvature rows; finish exactly on a geometric schedule.
    if (sweep == next_finish || moved <= 1e-3 * tol) {
      next_finish += next_finish;
      std::vector<int> active;
      for (int j = 0; j < m; ++j) {
        if (lambda[j] > 0.0) active.push_back(j);
      }
      Eigen::VectorXd exact;
      if (active_set_finish(y, c, active, tol, exact)) {
        res.x = exact;
        res.max_violation = c.max_violation(res.x);
        return res;
      }
      if (moved <= 1e-3 * tol && c.max_violation(x) <= tol) break;
    }
  }
  res.max_violation = c.max_violation(x);
  if (res.max_violation > tol) {
    throw EmptyFeasibleSet("projection left a violation of " + std::to_string(res.max_violation) +
                           " after " + std::to_string(res.sweeps) + " sweeps");
  }
  return res;
}

}  // namespace cneumann
