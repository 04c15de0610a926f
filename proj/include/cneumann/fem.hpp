#pragma once

// Lagrange finite elements for the Neumann Laplacian on a triangle mesh and
// the generalized eigenproblem K u = mu M u.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <string>
#include <vector>

#include "cneumann/mesh.hpp"

namespace cneumann {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class Element { P1 = 1, P2 = 2 };

/// Degree-of-freedom layout. For P2 the local order is the three vertices
/// followed by the midpoints of edges (0,1), (1,2), (2,0).
class FemSpace {
 public:
  FemSpace(const TriMesh& mesh, Element element);

  const TriMesh& mesh() const { return *mesh_; }
  Element element() const { return element_; }
  int num_dofs() const { return num_dofs_; }
  int dofs_per_cell() const { return element_ == Element::P2 ? 6 : 3; }
  const std::array<int, 6>& cell_dofs(int t) const { return cell_dofs_[t]; }

  /// Triangle owning boundary edge e and the local vertex slots of its ends.
  struct BoundaryCell {
    int tri;
    int la;
    int lb;
  };
  const BoundaryCell& boundary_cell(int e) const { return boundary_cells_[e]; }

  /// Value and gradient of the finite element function u in triangle t at
  /// barycentric coordinates l.
  void evaluate(const Eigen::VectorXd& u, int t, const Eigen::Vector3d& l, double& value,
                Point& gradient) const;
  /// Evaluate several functions (columns of U) at once.
  void evaluate(const Eigen::MatrixXd& U, int t, const Eigen::Vector3d& l,
                Eigen::VectorXd& values, Eigen::MatrixXd& gradients) const;

 private:
  const TriMesh* mesh_;
  Element element_;
  int num_dofs_ = 0;
  std::vector<std::array<int, 6>> cell_dofs_;
  std::vector<BoundaryCell> boundary_cells_;
};

struct FemMatrices {
  SparseMatrix stiffness;
  SparseMatrix mass;
};

FemMatrices assemble(const FemSpace& space);

struct EigenOptions {
  double residual_tol = 1e-8;
  int max_cycles = 300;
  /// Shift s in (K + s M) relative to 1 / diam^2 of the mesh.
  double shift_rel = 1e-3;
  /// Extra Ritz vectors carried beyond the requested ones.
  int guard_vectors = 3;
  /// Krylov blocks per restart cycle.
  int krylov_blocks = 4;
  unsigned seed = 12345;
};

struct Spectrum {
  std::vector<double> mu;          // ascending, mu[0] = 0
  Eigen::MatrixXd vectors;         // columns M-orthonormal, one per eigenvalue
  std::vector<double> residuals;   // ||K u - mu M u|| / ||M u||
  std::vector<std::vector<int>> clusters;
  int cycles = 0;

  int size() const { return static_cast<int>(mu.size()); }
  /// Cluster containing index k.
  const std::vector<int>& cluster_of(int k) const;
};

inline constexpr double kDefaultClusterTol = 5e-3;

/// Groups consecutive eigenvalues with |mu_i - mu_j| <= tau * max(1, mu_i).
std::vector<std::vector<int>> cluster(const std::vector<double>& mu,
                                      double tau = kDefaultClusterTol);

/// Smallest `count` eigenpairs (mu_0 .. mu_{count-1}) of K u = mu M u with the
/// constant mode deflated explicitly.
Spectrum eigs(const FemMatrices& mats, int count, double length_scale,
              const EigenOptions& opts = {});

/// Assemble and solve in one step.
Spectrum neumann_spectrum(const TriMesh& mesh, int count, Element element = Element::P2,
                          const EigenOptions& opts = {});

/// {"mu": [...], "residuals": [...], "clusters": [[...]]}
std::string spectrum_json(const Spectrum& s);

}  // namespace cneumann
