#include "cneumann/sensitivity.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <numbers>
#include <ostream>

#include "cneumann/errors.hpp"

namespace cneumann {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double angle_of(const Point& v) {
  double a = std::atan2(v.y(), v.x());
  return a < 0.0 ? a + kTwoPi : a;
}

// Hat-function weights at angle theta on the uniform grid with n nodes.
void hat_weights(double theta, int n, int& j, double& w_lo, double& w_hi) {
  const double h = kTwoPi / n;
  const double s = theta / h;
  const double fl = std::floor(s);
  j = wrap_index(static_cast<int>(fl), n);
  w_hi = s - fl;
  w_lo = 1.0 - w_hi;
}

}  // namespace

BoundaryTrace boundary_trace(const FemSpace& space, const Spectrum& spectrum,
                             const std::vector<int>& indices) {
  const TriMesh& mesh = space.mesh();
  BoundaryTrace tr;
  tr.indices = indices;
  tr.num_source_vertices = static_cast<int>(mesh.source_vertices.size());
  Eigen::MatrixXd U(spectrum.vectors.rows(), indices.size());
  for (std::size_t c = 0; c < indices.size(); ++c) {
    if (indices[c] < 0 || indices[c] >= spectrum.size()) {
      throw ConfigError("eigenvalue index outside the computed spectrum");
    }
    U.col(c) = spectrum.vectors.col(indices[c]);
    tr.mu.push_back(spectrum.mu[indices[c]]);
  }
  const double g = 0.5 / std::sqrt(3.0);
  const double xi[2] = {0.5 - g, 0.5 + g};
  tr.samples.reserve(2 * mesh.boundary_edges.size());
  Eigen::VectorXd vals;
  Eigen::MatrixXd grads;
  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
    const auto& be = mesh.boundary_edges[e];
    const auto& cell = space.boundary_cell(static_cast<int>(e));
    const Point a = mesh.nodes[be.a], b = mesh.nodes[be.b];
    const double len = (b - a).norm();
    if (len == 0.0) continue;
    const Point tau = (b - a) / len;
    const Point nrm(tau.y(), -tau.x());
    for (double s : xi) {
      Eigen::Vector3d l = Eigen::Vector3d::Zero();
      l[cell.la] = 1.0 - s;
      l[cell.lb] = s;
      space.evaluate(U, cell.tri, l, vals, grads);
      BoundarySample smp;
      smp.source_edge = be.dir;
      smp.t = be.t0 + s * (be.t1 - be.t0);
      smp.ds = 0.5 * len;
      smp.x = (1.0 - s) * a + s * b;
      smp.normal = nrm;
      smp.u = vals;
      smp.dudt = grads.transpose() * tau;
      tr.samples.push_back(std::move(smp));
    }
  }
  return tr;
}

BoundaryDensity boundary_density_unchecked(const FemSpace& space, const Spectrum& spectrum,
                                           int k) {
  BoundaryTrace tr = boundary_trace(space, spectrum, {k});
  BoundaryDensity d;
  d.k = k;
  d.mu = spectrum.mu[k];
  d.num_source_vertices = tr.num_source_vertices;
  d.f.reserve(tr.samples.size());
  for (const auto& s : tr.samples) {
    d.f.push_back(k == 0 ? 0.0 : d.mu * s.u[0] * s.u[0] - s.dudt[0] * s.dudt[0]);
  }
  d.samples = std::move(tr.samples);
  return d;
}

BoundaryDensity boundary_density(const FemSpace& space, const Spectrum& spectrum, int k) {
  const auto& c = spectrum.cluster_of(k);
  if (c.size() > 1) {
    std::string members;
    for (int i : c) members += (members.empty() ? "" : ",") + std::to_string(i);
    throw MultipleEigenvalue("mu_" + std::to_string(k) + " lies in cluster {" + members +
                             "}; use the cluster matrix derivative");
  }
  return boundary_density_unchecked(space, spectrum, k);
}

std::vector<Point> vertex_forces(const BoundaryDensity& density) {
  const int n = density.num_source_vertices;
  std::vector<Point> F(n, Point::Zero());
  for (std::size_t q = 0; q < density.samples.size(); ++q) {
    const auto& s = density.samples[q];
    const Point w = -density.f[q] * s.ds * s.normal;
    F[s.source_edge] += (1.0 - s.t) * w;
    F[wrap_index(s.source_edge + 1, n)] += s.t * w;
  }
  return F;
}

std::vector<Point> discrete_vertex_forces(const FemSpace& space, const Spectrum& spectrum, int k) {
  const TriMesh& mesh = space.mesh();
  const int n = mesh.num_nodes();
  const Eigen::VectorXd u = spectrum.vectors.col(k);
  const double mu = spectrum.mu[k];

  // degree-4 rule on the reference triangle, weights summing to one
  static const std::array<std::pair<Eigen::Vector3d, double>, 6> quad = [] {
    const double a1 = 0.445948490915965, b1 = 1.0 - 2.0 * a1, w1 = 0.223381589678011;
    const double a2 = 0.091576213509771, b2 = 1.0 - 2.0 * a2, w2 = 0.109951743655322;
    return std::array<std::pair<Eigen::Vector3d, double>, 6>{
        std::pair{Eigen::Vector3d(a1, a1, b1), w1}, std::pair{Eigen::Vector3d(a1, b1, a1), w1},
        std::pair{Eigen::Vector3d(b1, a1, a1), w1}, std::pair{Eigen::Vector3d(a2, a2, b2), w2},
        std::pair{Eigen::Vector3d(a2, b2, a2), w2}, std::pair{Eigen::Vector3d(b2, a2, a2), w2}};
  }();

  // node gradient G: mu' = sum_nodes G_i . V_i for any nodal velocity field
  std::vector<Point> G(n, Point::Zero());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.triangles[t];
    const Point p[3] = {mesh.nodes[v[0]], mesh.nodes[v[1]], mesh.nodes[v[2]]};
    const double area2 = (p[1] - p[0]).x() * (p[2] - p[0]).y() - (p[1] - p[0]).y() * (p[2] - p[0]).x();
    double energy = 0.0;  // int |grad u|^2 - mu u^2
    Eigen::Matrix2d C = Eigen::Matrix2d::Zero();  // int grad u grad u^T
    for (const auto& [l, w] : quad) {
      double val;
      Point grad;
      space.evaluate(u, t, l, val, grad);
      const double dA = 0.5 * area2 * w;
      energy += (grad.squaredNorm() - mu * val * val) * dA;
      C += grad * grad.transpose() * dA;
    }
    for (int a = 0; a < 3; ++a) {
      const Point& q1 = p[(a + 1) % 3];
      const Point& q2 = p[(a + 2) % 3];
      const Point glam = Point(q1.y() - q2.y(), q2.x() - q1.x()) / area2;
      G[v[a]] += energy * glam - 2.0 * C * glam;
    }
  }

  // boundary nodes move with their source edge, as in deform()
  const int n_src = static_cast<int>(mesh.source_vertices.size());
  std::vector<int> dir(n, -1);
  std::vector<double> par(n, 0.0);
  for (const auto& e : mesh.boundary_edges) {
    if (dir[e.a] < 0) {
      dir[e.a] = e.dir;
      par[e.a] = e.t0;
    }
    if (dir[e.b] < 0) {
      dir[e.b] = e.dir;
      par[e.b] = e.t1;
    }
  }
  std::vector<int> idx(n, -1);
  int m = 0;
  for (int i = 0; i < n; ++i) {
    if (dir[i] < 0) idx[i] = m++;
  }

  // adjoint of the harmonic extension L_II V_I = -L_IB V_B:
  // G_B <- G_B - L_BI L_II^{-1} G_I
  if (m > 0) {
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<std::array<double, 9>> local(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const auto& v = mesh.triangles[t];
      const Point p[3] = {mesh.nodes[v[0]], mesh.nodes[v[1]], mesh.nodes[v[2]]};
      const double area2 = (p[1] - p[0]).x() * (p[2] - p[0]).y() - (p[1] - p[0]).y() * (p[2] - p[0]).x();
      Point g[3];
      for (int a = 0; a < 3; ++a) {
        const Point& q1 = p[(a + 1) % 3];
        const Point& q2 = p[(a + 2) % 3];
        g[a] = Point(q1.y() - q2.y(), q2.x() - q1.x());
      }
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const double kab = g[a].dot(g[b]) / (2.0 * area2);
          local[t][3 * a + b] = kab;
          if (idx[v[a]] >= 0 && idx[v[b]] >= 0) trip.emplace_back(idx[v[a]], idx[v[b]], kab);
        }
      }
    }
    Eigen::SparseMatrix<double> lap(m, m);
    lap.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
    if (solver.info() != Eigen::Success) throw SolverNoConvergence("harmonic extension adjoint failed");
    Eigen::MatrixXd gi(m, 2);
    for (int i = 0; i < n; ++i) {
      if (idx[i] >= 0) gi.row(idx[i]) = G[i].transpose();
    }
    const Eigen::MatrixXd w = solver.solve(gi);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const auto& v = mesh.triangles[t];
      for (int a = 0; a < 3; ++a) {
        if (idx[v[a]] >= 0) continue;
        for (int b = 0; b < 3; ++b) {
          if (idx[v[b]] < 0) continue;
          G[v[a]] -= local[t][3 * a + b] * w.row(idx[v[b]]).transpose();
        }
      }
    }
  }

  std::vector<Point> F(n_src, Point::Zero());
  for (int i = 0; i < n; ++i) {
    if (dir[i] < 0) continue;
    F[dir[i]] += (1.0 - par[i]) * G[i];
    F[wrap_index(dir[i] + 1, n_src)] += par[i] * G[i];
  }
  return F;
}

VertexJacobian support_jacobian(const SupportVector& sv) {
  const int n = sv.size();
  const double c = 1.0 / (2.0 * std::sin(sv.step()));
  VertexJacobian jac;
  jac.num_params = n;
  jac.rows.resize(n);
  for (int a = 0; a < n; ++a) {
    const double th = sv.angle(a);
    const Point r(std::cos(th), std::sin(th));
    const Point t(-std::sin(th), std::cos(th));
    jac.rows[a] = {{a, r}, {wrap_index(a + 1, n), c * t}, {wrap_index(a - 1, n), -c * t}};
  }
  return jac;
}

VertexJacobian gauge_jacobian(const GaugeVector& gv) {
  const int n = gv.size();
  VertexJacobian jac;
  jac.num_params = n;
  jac.rows.resize(n);
  for (int a = 0; a < n; ++a) {
    const double th = gv.angle(a);
    const Point r(std::cos(th), std::sin(th));
    jac.rows[a] = {{a, -r / (gv[a] * gv[a])}};
  }
  return jac;
}

Eigen::VectorXd pull_back(const std::vector<Point>& forces, const VertexJacobian& jac) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(jac.num_params);
  for (std::size_t a = 0; a < forces.size(); ++a) {
    for (const auto& [j, dx] : jac.rows[a]) g[j] += forces[a].dot(dx);
  }
  return g;
}

Eigen::VectorXd support_gradient(const SupportVector& sv, const BoundaryDensity& density,
                                 VelocityModel model) {
  if (density.num_source_vertices != sv.size()) {
    throw ConfigError("density was computed on a polygon with a different vertex count");
  }
  if (model == VelocityModel::Exact) return pull_back(vertex_forces(density), support_jacobian(sv));
  const int n = sv.size();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (std::size_t q = 0; q < density.samples.size(); ++q) {
    const auto& s = density.samples[q];
    int j;
    double wl, wh;
    hat_weights(angle_of(s.normal), n, j, wl, wh);
    g[j] -= density.f[q] * s.ds * wl;
    g[wrap_index(j + 1, n)] -= density.f[q] * s.ds * wh;
  }
  return g;
}

Eigen::VectorXd gauge_gradient(const GaugeVector& gv, const BoundaryDensity& density,
                               VelocityModel model) {
  if (density.num_source_vertices != gv.size()) {
    throw ConfigError("density was computed on a polygon with a different vertex count");
  }
  if (model == VelocityModel::Exact) return pull_back(vertex_forces(density), gauge_jacobian(gv));
  const int n = gv.size();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (std::size_t q = 0; q < density.samples.size(); ++q) {
    const auto& s = density.samples[q];
    int j;
    double wl, wh;
    hat_weights(angle_of(s.x), n, j, wl, wh);
    const double rn = s.x.normalized().dot(s.normal);
    const int j1 = wrap_index(j + 1, n);
    g[j] += density.f[q] * s.ds * wl * rn / (gv[j] * gv[j]);
    g[j1] += density.f[q] * s.ds * wh * rn / (gv[j1] * gv[j1]);
  }
  return g;
}

Eigen::MatrixXd multi_density(const BoundaryTrace& trace,
                              const std::vector<double>& normal_velocity) {
  if (normal_velocity.size() != trace.samples.size()) {
    throw ConfigError("normal velocity must be given at every boundary sample");
  }
  const int m = static_cast<int>(trace.indices.size());
  double mu = 0.0;
  for (double v : trace.mu) mu += v / m;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t q = 0; q < trace.samples.size(); ++q) {
    const auto& s = trace.samples[q];
    const double w = s.ds * normal_velocity[q];
    out += w * (s.dudt * s.dudt.transpose() - mu * s.u * s.u.transpose());
  }
  return 0.5 * (out + out.transpose());
}

BoundaryTrace cluster_trace(const FemSpace& space, const FemMatrices& mats,
                            const Spectrum& spectrum, const std::vector<int>& cluster) {
  Eigen::MatrixXd V(spectrum.vectors.rows(), cluster.size());
  for (std::size_t c = 0; c < cluster.size(); ++c) V.col(c) = spectrum.vectors.col(cluster[c]);
  const Eigen::MatrixXd G = V.transpose() * (mats.mass * V);
  const double err =
      (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
  if (err > 1e-8) {
    throw ClusterInconsistent("cluster eigenvectors deviate from M-orthonormality by " +
                              std::to_string(err));
  }
  return boundary_trace(space, spectrum, cluster);
}

std::vector<Point> perimeter_forces(const std::vector<Point>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<Point> F(n, Point::Zero());
  for (int a = 0; a < n; ++a) {
    const int b = wrap_index(a + 1, n);
    const Point e = v[b] - v[a];
    const double len = e.norm();
    if (len == 0.0) continue;
    F[b] += e / len;
    F[a] -= e / len;
  }
  return F;
}

std::vector<Point> diameter_forces(const ConvexPolygon& poly) {
  std::vector<Point> F(poly.size(), Point::Zero());
  const auto [i, j] = diameter_pair(poly);
  const Point d = poly.vertices[i] - poly.vertices[j];
  const double len = d.norm();
  if (len == 0.0) return F;
  F[i] += d / len;
  F[j] -= d / len;
  return F;
}

void write_gradient_csv(std::ostream& os, const Eigen::VectorXd& grad,
                        const std::vector<double>& angles) {
  os.precision(17);
  os << "i,theta,dJ\n";
  for (int i = 0; i < grad.size(); ++i) {
    os << i << ',' << (i < static_cast<int>(angles.size()) ? angles[i] : 0.0) << ',' << grad[i]
       << '\n';
  }
}

}  // namespace cneumann
