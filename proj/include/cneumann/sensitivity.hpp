#pragma once

// Shape derivatives of Neumann eigenvalues with respect to the polygon
// parameters. For a boundary velocity V the derivative of a simple
// eigenvalue is
//     mu' = -int_{dK} f V.n ds,   f = mu u^2 - |grad u|^2,
// and on a polygon V is the linear interpolation of the vertex velocities
// along each edge. Since du/dn = 0, |grad u|^2 is evaluated as the squared
// tangential derivative, which is the better resolved component.

#include <Eigen/Core>

#include <iosfwd>
#include <vector>

#include "cneumann/fem.hpp"
#include "cneumann/geometry.hpp"

namespace cneumann {

/// Traces of a group of eigenfunctions at the boundary quadrature points.
struct BoundarySample {
  int source_edge = 0;  // source polygon edge (vertex source_edge -> +1)
  double t = 0.0;       // affine parameter along that edge
  double ds = 0.0;      // quadrature weight times arc length
  Point x;
  Point normal;         // outward unit normal
  Eigen::VectorXd u;    // values of the selected eigenfunctions
  Eigen::VectorXd dudt; // tangential derivatives
};

struct BoundaryTrace {
  std::vector<int> indices;
  std::vector<double> mu;
  std::vector<BoundarySample> samples;
  int num_source_vertices = 0;
};

/// Two Gauss points per boundary mesh edge.
BoundaryTrace boundary_trace(const FemSpace& space, const Spectrum& spectrum,
                             const std::vector<int>& indices);

/// f = mu_k u_k^2 - (d_t u_k)^2 at every boundary sample.
struct BoundaryDensity {
  int k = 0;
  double mu = 0.0;
  std::vector<BoundarySample> samples;  // u / dudt hold the single function
  std::vector<double> f;
  int num_source_vertices = 0;
};

/// Throws MultipleEigenvalue when mu_k belongs to a cluster of size > 1.
BoundaryDensity boundary_density(const FemSpace& space, const Spectrum& spectrum, int k);

/// Same quantity without the simplicity check, used by the smooth surrogate
/// that aggregates nearby eigenvalues.
BoundaryDensity boundary_density_unchecked(const FemSpace& space, const Spectrum& spectrum,
                                           int k);

/// d mu / d x_a for every source vertex from the boundary form, with vertex
/// velocities interpolated linearly along straight edges.
std::vector<Point> vertex_forces(const BoundaryDensity& density);

/// d mu_k / d x_a of the discrete eigenvalue itself, for the mesh motion of
/// deform(): boundary nodes keep their edge parameters and interior nodes
/// follow the harmonic extension. Uses the volume form
///     mu' = int (|grad u|^2 - mu u^2) div V - 2 grad u . (DV grad u),
/// which is exact for Lagrange elements on moving affine triangles, and one
/// adjoint solve for the extension. mu_k should be simple.
std::vector<Point> discrete_vertex_forces(const FemSpace& space, const Spectrum& spectrum, int k);

/// Sparse derivative of the vertices with respect to the parameters:
/// rows[a] lists (j, d x_a / d q_j).
struct VertexJacobian {
  int num_params = 0;
  std::vector<std::vector<std::pair<int, Point>>> rows;
};

VertexJacobian support_jacobian(const SupportVector& sv);
VertexJacobian gauge_jacobian(const GaugeVector& gv);

/// Pull vertex forces back to parameter space.
Eigen::VectorXd pull_back(const std::vector<Point>& forces, const VertexJacobian& jac);

enum class VelocityModel {
  /// Vertex velocities interpolated linearly along each edge.
  Exact,
  /// Hat functions of the boundary angle: the perturbation of p_i (or
  /// gamma_i) is spread with weight phi_i(theta(x)), theta the outward
  /// normal angle (support) or the polar angle (gauge). Only first-order
  /// accurate in the sampling step; kept for comparison.
  NormalAngleHat,
};

Eigen::VectorXd support_gradient(const SupportVector& sv, const BoundaryDensity& density,
                                 VelocityModel model = VelocityModel::Exact);
Eigen::VectorXd gauge_gradient(const GaugeVector& gv, const BoundaryDensity& density,
                               VelocityModel model = VelocityModel::Exact);

/// Pointwise matrix density (d_t u_a d_t u_b - mu u_a u_b) integrated against
/// a normal velocity. Eigenvalues of the result are the one-sided directional
/// derivatives of the clustered eigenvalues.
Eigen::MatrixXd multi_density(const BoundaryTrace& trace,
                              const std::vector<double>& normal_velocity);

/// Checks M-orthonormality of the cluster's eigenvectors (ClusterInconsistent
/// otherwise) and returns the trace of the cluster.
BoundaryTrace cluster_trace(const FemSpace& space, const FemMatrices& mats,
                            const Spectrum& spectrum, const std::vector<int>& cluster);

/// d P / d x_a of the polygon perimeter (zero-length edges contribute nothing).
std::vector<Point> perimeter_forces(const std::vector<Point>& vertices);

/// d D / d x_a for the pair realizing the diameter.
std::vector<Point> diameter_forces(const ConvexPolygon& poly);

/// CSV rows "i,theta_i,dJ/dq_i".
void write_gradient_csv(std::ostream& os, const Eigen::VectorXd& grad,
                        const std::vector<double>& angles);

}  // namespace cneumann
