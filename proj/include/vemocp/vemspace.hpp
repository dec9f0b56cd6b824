// Local enhanced virtual element space of order k: degree-of-freedom layout
// (vertex values, Gauss-Lobatto edge values, scaled internal moments) and the
// computable projector matrices PiNabla (H1), Pi0k (L2) and Pi0Grad (L2 of
// the gradient), all expressed in the scaled monomial basis.

#ifndef VEMOCP_VEMSPACE_HPP
#define VEMOCP_VEMSPACE_HPP

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "vemocp/mesh.hpp"
#include "vemocp/polybasis.hpp"

namespace vemocp {

/// Global numbering: vertex DOFs, then k-1 internal points per edge
/// (ordered along the edge from the lower vertex index), then dim P_{k-2}
/// scaled moments per cell.
struct DofLayout {
  int k;
  int n_vertex, n_edge_internal, n_moment, n_total;
  std::vector<std::vector<int>> cell_dofs; // local ordering -> global dof
  std::vector<bool> on_dirichlet;          // vertex/edge dofs on Dirichlet edges

  int vertex_dof(int v) const { return v; }
  int edge_dof(int e, int m) const { return n_vertex + e * (k - 1) + m; }
  int moment_offset(int c) const;
  int n_dirichlet() const;

private:
  friend DofLayout dof_layout(const PolyMesh&, int);
  std::vector<int> moment_offsets_;
};

DofLayout dof_layout(const PolyMesh& mesh, int k);

/// Everything local needed to assemble projectors on one cell: geometry,
/// scaled monomial basis, loop vertices and, per loop edge, the local
/// indices of the k+1 trace nodes in traversal order.
struct CellContext {
  int cell;
  int k;
  CellGeometry geom;
  MonomialBasis basis;
  std::vector<Point> verts;                 // loop coordinates
  std::vector<std::vector<int>> edge_nodes; // per loop edge, k+1 local dofs
  int n_dof;
  int n_vertex_dofs() const { return static_cast<int>(verts.size()); }
  int moment_dof(int i) const { return n_vertex_dofs() * k + i; }
};

CellContext cell_context(const PolyMesh& mesh, int c, int k);

struct ProjectorSet {
  Eigen::MatrixXd PiNabla;  // dim P_k x N_dof, H1 projection coefficients
  Eigen::MatrixXd Pi0k;     // dim P_k x N_dof, L2 projection
  Eigen::MatrixXd Pi0GradX; // dim P_{k-1} x N_dof
  Eigen::MatrixXd Pi0GradY;
  Eigen::MatrixXd D;        // N_dof x dim P_k, DOFs of the monomials
  Eigen::MatrixXd H;        // dim P_k Gram matrix of the monomials
};

/// H1 projection: orthogonality of gradients against P_k plus the
/// boundary-average constraint fixing the constant.
Eigen::MatrixXd build_pi_nabla(const CellContext& ctx);
/// L2 projection onto P_k: moments up to k-2 from the internal DOFs, the
/// higher ones from PiNabla through the enhancement constraint.
Eigen::MatrixXd build_pi0k(const CellContext& ctx, const Eigen::MatrixXd& pi_nabla,
                           const Eigen::MatrixXd& gram);
/// L2 projection of the gradient onto P_{k-1}^2, by integration by parts.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_pi0_grad(const CellContext& ctx,
                                                           const Eigen::MatrixXd& gram);
/// DOFs of the monomials (vertex/edge values and scaled moments).
Eigen::MatrixXd build_dof_matrix(const CellContext& ctx);

ProjectorSet build_projectors(const CellContext& ctx);

/// Lagrange basis values of the k+1 edge trace nodes at the given
/// parameters t in [0,1] (row per t, column per node).
Eigen::MatrixXd trace_basis(int k, const Eigen::VectorXd& t);
/// Parameters in [0,1] of the k+1 trace nodes (endpoints + internal
/// Gauss-Lobatto points).
Eigen::VectorXd trace_nodes(int k);

/// DOF vector interpolating a smooth function (point values at vertex and
/// edge nodes, scaled moments by quadrature).
Eigen::VectorXd interpolate(const PolyMesh& mesh, const DofLayout& layout,
                            const std::function<double(const Point&)>& f);

} // namespace vemocp

#endif
