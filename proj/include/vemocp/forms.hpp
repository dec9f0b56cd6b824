// Local discrete bilinear forms: the stabilized stiffness+reaction form with
// dofi-dofi stabilization acting on the non-polynomial slack, the observation
// mass form, data load vectors, and the stabilization-free k=1 form built
// from projections onto curl spaces.

#ifndef VEMOCP_FORMS_HPP
#define VEMOCP_FORMS_HPP

#include <functional>

#include <Eigen/Dense>

#include "vemocp/vemspace.hpp"

namespace vemocp {

using ScalarFn = std::function<double(const Point&)>;

enum class Scheme { Stabilized, StabFree };

struct LocalForms {
  Eigen::MatrixXd A;       // local stiffness + reaction
  Eigen::MatrixXd M;       // local observation mass
  Eigen::VectorXd load_f;  // (f, Pi0k phi_j)_E
  Eigen::VectorXd load_yd; // (y_d, Pi0k phi_j)_E
  Scheme scheme = Scheme::Stabilized;
};

/// dofi-dofi stabilization on DOF vectors: sigma * identity. The composition
/// with the (I - Pi_nabla) slack happens in local_stiffness.
Eigen::MatrixXd dofi_dofi(int n_dof, double sigma);

/// a_h^E: consistency terms through the projectors plus the dofi-dofi
/// stabilization of the slack, weighted by the per-cell sup of |kappa| and
/// |gamma| |E|. Throws on a non-positive kappa sample.
Eigen::MatrixXd local_stiffness(const CellContext& ctx, const ProjectorSet& proj,
                                const ScalarFn& kappa, const ScalarFn& gamma, double sigma);

/// m_h^E = Pi0k^T H Pi0k (caller restricts to observation cells).
Eigen::MatrixXd local_obs_mass(const ProjectorSet& proj);

/// Load vectors (f, Pi0k phi_j)_E and (y_d, Pi0k phi_j)_E, data integrated
/// with the high-exactness rule.
std::pair<Eigen::VectorXd, Eigen::VectorXd> local_loads(const CellContext& ctx,
                                                        const ProjectorSet& proj,
                                                        const ScalarFn& f, const ScalarFn& y_d);

struct StabFreeProjector {
  int ell;                // selected polynomial degree l_E
  Eigen::MatrixXd Pi_hat; // (dim P_{l+1} - 1) x N_dof, coefficients in {curl m_i}
  Eigen::MatrixXd Pi_curl; // dim P_{l+1} x N_dof, monomial coefficients
};

/// Smallest ell >= k-1 such that the map from zero-mean polynomials of
/// degree ell+1 to the vector of edge means has full row rank (QR rank with
/// relative threshold tol). Throws when ell exceeds 2 + ceil(n_edges/2).
int select_ell(const CellContext& ctx, double tol = 1e-10);

/// Projections onto curl P_{ell+1}: Pi_hat from the boundary-only
/// orthogonality condition, Pi_curl recovered through the projector relation
/// plus the mean-value condition. Requires k = 1.
StabFreeProjector build_stabfree_projectors(const CellContext& ctx, const ProjectorSet& proj,
                                            int ell);

/// Stabilization-free local form (K Pi_hat grad w, Pi_hat grad q) +
/// (gamma Pi_curl w, Pi_curl q); coercive without any stability parameter.
Eigen::MatrixXd local_stiffness_stabfree(const CellContext& ctx, const StabFreeProjector& sf,
                                         const ScalarFn& kappa, const ScalarFn& gamma);

} // namespace vemocp

#endif
