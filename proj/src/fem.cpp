#include "cneumann/fem.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <limits>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "cneumann/errors.hpp"
#include "json.hpp"

namespace cneumann {

namespace {

// Degree-4 symmetric rule on the reference triangle (weights sum to one).
struct QuadPoint {
  Eigen::Vector3d l;
  double w;
};

const std::array<QuadPoint, 6>& triangle_rule() {
  static const std::array<QuadPoint, 6> rule = [] {
    const double a = 0.445948490915965, wa = 0.223381589678011;
    const double b = 0.091576213509771, wb = 0.109951743655322;
    return std::array<QuadPoint, 6>{
        QuadPoint{{a, a, 1 - 2 * a}, wa}, QuadPoint{{a, 1 - 2 * a, a}, wa},
        QuadPoint{{1 - 2 * a, a, a}, wa}, QuadPoint{{b, b, 1 - 2 * b}, wb},
        QuadPoint{{b, 1 - 2 * b, b}, wb}, QuadPoint{{1 - 2 * b, b, b}, wb}};
  }();
  return rule;
}

// Barycentric gradients of a triangle and its signed area.
double barycentric_gradients(const Point& p0, const Point& p1, const Point& p2,
                             std::array<Point, 3>& g) {
  const double twice = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
  const Point* p[3] = {&p0, &p1, &p2};
  for (int i = 0; i < 3; ++i) {
    const Point& a = *p[(i + 1) % 3];
    const Point& b = *p[(i + 2) % 3];
    g[i] = Point(a.y() - b.y(), b.x() - a.x()) / twice;
  }
  return 0.5 * twice;
}

constexpr int kEdgeA[3] = {0, 1, 2};
constexpr int kEdgeB[3] = {1, 2, 0};

// Shape functions and gradients at barycentric point l.
void shape(Element el, const Eigen::Vector3d& l, const std::array<Point, 3>& g, double* phi,
           Point* dphi) {
  if (el == Element::P1) {
    for (int i = 0; i < 3; ++i) {
      phi[i] = l[i];
      dphi[i] = g[i];
    }
    return;
  }
  for (int i = 0; i < 3; ++i) {
    phi[i] = l[i] * (2.0 * l[i] - 1.0);
    dphi[i] = (4.0 * l[i] - 1.0) * g[i];
  }
  for (int e = 0; e < 3; ++e) {
    const int i = kEdgeA[e], j = kEdgeB[e];
    phi[3 + e] = 4.0 * l[i] * l[j];
    dphi[3 + e] = 4.0 * (l[i] * g[j] + l[j] * g[i]);
  }
}

}  // namespace

FemSpace::FemSpace(const TriMesh& mesh, Element element) : mesh_(&mesh), element_(element) {
  const int nt = mesh.num_triangles();
  cell_dofs_.resize(nt);
  num_dofs_ = mesh.num_nodes();
  std::map<std::pair<int, int>, int> edge_dof;
  for (int t = 0; t < nt; ++t) {
    const auto& v = mesh.triangles[t];
    auto& d = cell_dofs_[t];
    d = {v[0], v[1], v[2], -1, -1, -1};
    if (element == Element::P2) {
      for (int e = 0; e < 3; ++e) {
        const auto key = std::minmax(v[kEdgeA[e]], v[kEdgeB[e]]);
        auto [it, inserted] = edge_dof.emplace(key, num_dofs_);
        if (inserted) ++num_dofs_;
        d[3 + e] = it->second;
      }
    }
  }
  // boundary edge -> owning triangle
  std::map<std::pair<int, int>, std::pair<int, int>> directed;
  for (int t = 0; t < nt; ++t) {
    const auto& v = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) directed[{v[kEdgeA[e]], v[kEdgeB[e]]}] = {t, e};
  }
  boundary_cells_.reserve(mesh.boundary_edges.size());
  for (const auto& be : mesh.boundary_edges) {
    auto it = directed.find({be.a, be.b});
    if (it == directed.end()) throw MeshFailure("boundary edge without an owning triangle");
    const auto [t, e] = it->second;
    boundary_cells_.push_back({t, kEdgeA[e], kEdgeB[e]});
  }
}

void FemSpace::evaluate(const Eigen::VectorXd& u, int t, const Eigen::Vector3d& l,
                        double& value, Point& gradient) const {
  const auto& v = mesh_->triangles[t];
  std::array<Point, 3> g;
  barycentric_gradients(mesh_->nodes[v[0]], mesh_->nodes[v[1]], mesh_->nodes[v[2]], g);
  double phi[6];
  Point dphi[6];
  shape(element_, l, g, phi, dphi);
  value = 0.0;
  gradient.setZero();
  const auto& d = cell_dofs_[t];
  for (int a = 0; a < dofs_per_cell(); ++a) {
    value += u[d[a]] * phi[a];
    gradient += u[d[a]] * dphi[a];
  }
}

void FemSpace::evaluate(const Eigen::MatrixXd& U, int t, const Eigen::Vector3d& l,
                        Eigen::VectorXd& values, Eigen::MatrixXd& gradients) const {
  const auto& v = mesh_->triangles[t];
  std::array<Point, 3> g;
  barycentric_gradients(mesh_->nodes[v[0]], mesh_->nodes[v[1]], mesh_->nodes[v[2]], g);
  double phi[6];
  Point dphi[6];
  shape(element_, l, g, phi, dphi);
  const int m = static_cast<int>(U.cols());
  values.setZero(m);
  gradients.setZero(2, m);
  const auto& d = cell_dofs_[t];
  for (int a = 0; a < dofs_per_cell(); ++a) {
    values += phi[a] * U.row(d[a]).transpose();
    gradients += dphi[a] * U.row(d[a]);
  }
}

FemMatrices assemble(const FemSpace& space) {
  const TriMesh& mesh = space.mesh();
  const int nloc = space.dofs_per_cell();
  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(static_cast<std::size_t>(mesh.num_triangles()) * nloc * nloc);
  mt.reserve(kt.capacity());
  const auto& rule = triangle_rule();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.triangles[t];
    std::array<Point, 3> g;
    const double area = barycentric_gradients(mesh.nodes[v[0]], mesh.nodes[v[1]], mesh.nodes[v[2]], g);
    if (!(area > 0.0)) throw MeshFailure("non-positive triangle area in assembly");
    double kl[6][6] = {}, ml[6][6] = {};
    for (const auto& q : rule) {
      double phi[6];
      Point dphi[6];
      shape(space.element(), q.l, g, phi, dphi);
      const double w = q.w * area;
      for (int a = 0; a < nloc; ++a) {
        for (int b = 0; b < nloc; ++b) {
          kl[a][b] += w * dphi[a].dot(dphi[b]);
          ml[a][b] += w * phi[a] * phi[b];
        }
      }
    }
    const auto& d = space.cell_dofs(t);
    for (int a = 0; a < nloc; ++a) {
      for (int b = 0; b < nloc; ++b) {
        kt.emplace_back(d[a], d[b], kl[a][b]);
        mt.emplace_back(d[a], d[b], ml[a][b]);
      }
    }
  }
  FemMatrices out;
  const int n = space.num_dofs();
  out.stiffness.resize(n, n);
  out.mass.resize(n, n);
  out.stiffness.setFromTriplets(kt.begin(), kt.end());
  out.mass.setFromTriplets(mt.begin(), mt.end());
  return out;
}

std::vector<std::vector<int>> cluster(const std::vector<double>& mu, double tau) {
  std::vector<std::vector<int>> groups;
  for (int i = 0; i < static_cast<int>(mu.size()); ++i) {
    if (!groups.empty()) {
      const int j = groups.back().back();
      if (std::abs(mu[i] - mu[j]) <= tau * std::max(1.0, mu[j])) {
        groups.back().push_back(i);
        continue;
      }
    }
    groups.push_back({i});
  }
  return groups;
}

const std::vector<int>& Spectrum::cluster_of(int k) const {
  for (const auto& c : clusters) {
    if (std::find(c.begin(), c.end(), k) != c.end()) return c;
  }
  throw ConfigError("eigenvalue index " + std::to_string(k) + " outside the computed spectrum");
}

namespace {

// M-orthonormalize the columns of W against `fixed` (already M-orthonormal,
// with MF = M * fixed) and among themselves. Block classical Gram-Schmidt
// followed by SVQB, both applied twice; numerically dependent directions
// are dropped.
Eigen::MatrixXd orthonormalize(const SparseMatrix& M, const Eigen::MatrixXd& fixed,
                               const Eigen::MatrixXd& MF, Eigen::MatrixXd W,
                               Eigen::MatrixXd& MW) {
  for (int pass = 0; pass < 2; ++pass) {
    if (fixed.cols() > 0) W -= fixed * (MF.transpose() * W);
    MW = M * W;
    Eigen::MatrixXd G = W.transpose() * MW;
    G = 0.5 * (G + G.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double top = lam.size() > 0 ? lam.maxCoeff() : 0.0;
    std::vector<int> keep;
    for (int i = 0; i < lam.size(); ++i) {
      if (lam[i] > 1e-20 * top && lam[i] > 0.0) keep.push_back(i);
    }
    Eigen::MatrixXd T(W.cols(), keep.size());
    for (std::size_t c = 0; c < keep.size(); ++c) {
      T.col(c) = es.eigenvectors().col(keep[c]) / std::sqrt(lam[keep[c]]);
    }
    W = W * T;
    MW = MW * T;
    if (W.cols() == 0) break;
  }
  return W;
}

}  // namespace

Spectrum eigs(const FemMatrices& mats, int count, double length_scale, const EigenOptions& opts) {
  const SparseMatrix& K = mats.stiffness;
  const SparseMatrix& M = mats.mass;
  const int n = static_cast<int>(K.rows());
  if (count < 1) throw ConfigError("eigenvalue count must be >= 1");
  const int want = count - 1;
  if (want + opts.guard_vectors + 1 > n) {
    throw SolverNoConvergence("mesh too coarse for " + std::to_string(count) + " eigenpairs");
  }

  // constant mode
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const double area = ones.dot(M * ones);
  Eigen::MatrixXd C = ones / std::sqrt(area);
  Eigen::MatrixXd MC = M * C;

  Spectrum sp;
  sp.mu.push_back(0.0);
  sp.vectors.resize(n, count);
  sp.vectors.col(0) = C.col(0);
  sp.residuals.push_back((K * C.col(0)).norm() / MC.col(0).norm());
  if (want == 0) {
    sp.clusters = cluster(sp.mu);
    return sp;
  }

  const double shift = opts.shift_rel / (length_scale * length_scale);
  SparseMatrix A = K + shift * M;
  Eigen::SimplicialLLT<SparseMatrix> llt(A);
  if (llt.info() != Eigen::Success) throw SolverNoConvergence("shifted factorization failed");

  // residuals cannot drop below rounding in M^-1 K; estimate its norm from
  // the diagonals so fine or thin meshes do not stall above the tolerance
  double ratio = 0.0;
  for (int i = 0; i < n; ++i) ratio = std::max(ratio, K.coeff(i, i) / M.coeff(i, i));
  const double tol = std::max(opts.residual_tol, 64.0 * std::numeric_limits<double>::epsilon() * ratio);

  const int block = want + opts.guard_vectors;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd X(n, block);
  for (int j = 0; j < block; ++j) {
    for (int i = 0; i < n; ++i) X(i, j) = unif(rng);
  }
  X = llt.solve(M * X);

  Eigen::VectorXd theta;
  Eigen::MatrixXd ritz;
  std::vector<double> res(want, 0.0);
  int cycle = 0;
  for (; cycle < opts.max_cycles; ++cycle) {
    Eigen::MatrixXd Q(n, 0), MQ(n, 0);
    Eigen::MatrixXd W = X;
    for (int j = 0; j < opts.krylov_blocks; ++j) {
      if (j > 0) W = llt.solve(M * W);
      Eigen::MatrixXd fixed(n, C.cols() + Q.cols()), mfixed(n, C.cols() + Q.cols());
      fixed << C, Q;
      mfixed << MC, MQ;
      Eigen::MatrixXd MW;
      Eigen::MatrixXd Wn = orthonormalize(M, fixed, mfixed, W, MW);
      if (Wn.cols() == 0) break;
      Eigen::MatrixXd Q2(n, Q.cols() + Wn.cols()), MQ2(n, Q.cols() + Wn.cols());
      Q2 << Q, Wn;
      MQ2 << MQ, MW;
      Q.swap(Q2);
      MQ.swap(MQ2);
      W = Wn;
    }
    if (Q.cols() < want) throw SolverNoConvergence("Krylov space collapsed");
    const Eigen::MatrixXd KQ = K * Q;
    Eigen::MatrixXd H = Q.transpose() * KQ;
    H = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const int keep = std::min<int>(block, static_cast<int>(Q.cols()));
    theta = es.eigenvalues().head(keep);
    const Eigen::MatrixXd S = es.eigenvectors().leftCols(keep);
    ritz = Q * S;
    const Eigen::MatrixXd Kr = KQ * S;
    const Eigen::MatrixXd Mr = MQ * S;
    bool done = true;
    for (int i = 0; i < want; ++i) {
      res[i] = (Kr.col(i) - theta[i] * Mr.col(i)).norm() / Mr.col(i).norm();
      if (!(res[i] <= tol)) done = false;
    }
    if (done) break;
    X = ritz;
  }
  if (cycle == opts.max_cycles) {
    std::ostringstream msg;
    msg << "eigensolver stopped after " << cycle << " cycles; worst residual "
        << *std::max_element(res.begin(), res.end());
    throw SolverNoConvergence(msg.str());
  }
  sp.cycles = cycle + 1;
  for (int i = 0; i < want; ++i) {
    Eigen::VectorXd u = ritz.col(i);
    Eigen::Index imax;
    u.cwiseAbs().maxCoeff(&imax);
    if (u[imax] < 0) u = -u;
    sp.mu.push_back(theta[i]);
    sp.vectors.col(i + 1) = u;
    sp.residuals.push_back(res[i]);
  }
  sp.clusters = cluster(sp.mu);
  return sp;
}

Spectrum neumann_spectrum(const TriMesh& mesh, int count, Element element,
                          const EigenOptions& opts) {
  FemSpace space(mesh, element);
  const FemMatrices mats = assemble(space);
  Point lo = mesh.nodes.front(), hi = lo;
  for (const auto& p : mesh.nodes) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return eigs(mats, count, (hi - lo).norm(), opts);
}

std::string spectrum_json(const Spectrum& s) {
  nlohmann::json j;
  j["mu"] = s.mu;
  j["residuals"] = s.residuals;
  j["clusters"] = s.clusters;
  return j.dump(2);
}

}  // namespace cneumann
