// Global optimal control discretization: continuous piecewise-polynomial
// control space on the control boundary, saddle-point KKT assembly over
// (state, control, adjoint) with symmetric Dirichlet elimination, direct
// sparse solve, and the discrete cost functional.

#ifndef VEMOCP_OCP_HPP
#define VEMOCP_OCP_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "vemocp/forms.hpp"
#include "vemocp/vemspace.hpp"

namespace vemocp {

using SpMat = Eigen::SparseMatrix<double>;
using VecFn = std::function<Eigen::Vector2d(const Point&)>;

struct OcpConfig {
  int k = 1;
  int k_u = 0; // 0 means k_u = k
  double sigma = 1.0;
  double alpha = 1.0;
  Scheme scheme = Scheme::Stabilized;
  ScalarFn kappa, gamma, f, y_d, g;
  double solver_tol = 1e-10;

  struct Exact {
    ScalarFn y, p, u;
    VecFn grad_y, grad_p;
  };
  std::optional<Exact> exact;

  int control_degree() const { return k_u > 0 ? k_u : k; }
  void check() const;
};

/// Continuous piecewise-P_{k_u} space on the control edges; DOFs are values
/// at edge endpoints (shared along each chain) and k_u - 1 internal
/// Gauss-Lobatto points per edge.
struct ControlSpace {
  int k_u = 1;
  std::vector<int> edges;                  // mesh edge indices on Gamma_C
  std::vector<std::vector<int>> edge_dofs; // per edge, k_u + 1 dofs from v0 to v1
  std::vector<Point> dof_points;
  int n_dofs = 0;
  double total_length = 0.0;
};

ControlSpace build_control_space(const PolyMesh& mesh, int k_u);

/// SPD 1D mass matrix on Gamma_C. Throws if the control boundary is empty.
SpMat control_mass(const PolyMesh& mesh, const ControlSpace& cs);

/// Coupling (u basis, trace basis of V_h)_e over the control edges;
/// rows indexed by V_h dofs, columns by control dofs.
SpMat control_coupling(const PolyMesh& mesh, const ControlSpace& cs, const DofLayout& layout);

/// Per-cell operators cached for assembly and post-processing.
struct CellOps {
  CellContext ctx;
  ProjectorSet proj;
  Eigen::MatrixXd A; // local stiffness (scheme already applied)
  Eigen::MatrixXd M; // local observation mass (0x0 outside the region)
  std::optional<StabFreeProjector> stabfree;
};

struct Discretization {
  const PolyMesh* mesh = nullptr;
  OcpConfig cfg;
  DofLayout layout;
  ControlSpace control;
  std::vector<CellOps> cells;
};

Discretization discretize(const PolyMesh& mesh, OcpConfig cfg);

/// Reduced symmetric KKT system over [free y | u | free p] with Dirichlet
/// data folded into the right-hand side; the state blocks are kept for
/// state-only solves and residual checks.
struct SaddleSystem {
  int n_free = 0, n_u = 0, n_dir = 0;
  std::vector<int> free_index; // global vh dof -> reduced index, -1 if constrained
  std::vector<int> dir_index;  // global vh dof -> dirichlet slot, -1 if free
  std::vector<int> dir_dofs;
  Eigen::VectorXd dir_values;  // interpolated Dirichlet datum for the state
  SpMat M;
  Eigen::VectorXd rhs;
  SpMat Ah_ff, Ah_fd; // state operator on free/free and free/constrained dofs
  SpMat C;            // full V_h rows x control dofs
  SpMat MC;
  double alpha = 1.0;
  int dim() const { return 2 * n_free + n_u; }
  int y_off() const { return 0; }
  int u_off() const { return n_free; }
  int p_off() const { return n_free + n_u; }
};

SaddleSystem assemble(const Discretization& d);

struct SolutionTriple {
  Eigen::VectorXd y, u, p; // y and p over all V_h dofs, boundary values included
  double kkt_residual = 0.0;
  double optimality_residual = 0.0; // norm of alpha MC u - C^T p
  double rhs_norm = 0.0;
};

/// Direct sparse factorization; throws on breakdown or when the relative
/// KKT residual exceeds tol.
SolutionTriple solve(const SaddleSystem& sys, double tol = 1e-10);

/// J_h = 1/2 sum_obs ||Pi0k y_h - y_d||^2 + alpha/2 ||u_h||^2 on Gamma_C,
/// evaluated with the assembly projectors and quadrature.
double evaluate_functional(const Discretization& d, const SolutionTriple& sol);

/// Solves the state equation alone: a_h(y, q) = (f, Pi0k q) + (flux, q) on
/// non-Dirichlet boundary edges, y = g on Gamma_D. flux receives the point
/// and the outward normal.
Eigen::VectorXd solve_state(const Discretization& d, const SaddleSystem& sys, const ScalarFn& f,
                            const std::function<double(const Point&, const Point&)>& flux,
                            const ScalarFn& g);

/// Problem config JSON: { "k", "k_u", "sigma", "alpha", "scheme", "kappa",
/// "gamma", "f", "y_d", "g", "tags", "exact" } with expression-valued
/// entries (see the grammar in expr.hpp / README).
struct ParsedConfig {
  OcpConfig cfg;
  TagRule tags; // null when the config carries no tag predicates
};
ParsedConfig load_config(const std::string& path);

/// Rebuilds a mesh with boundary tags reassigned by the rule.
PolyMesh retag(const PolyMesh& mesh, const TagRule& rule);

} // namespace vemocp

#endif
