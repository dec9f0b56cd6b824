// Error measures against exact or reference solutions (cellwise L2 and
// energy norms of the projected discrete fields, L2 control error on the
// control boundary), convergence-rate fitting and report emission.

#ifndef VEMOCP_ANALYSIS_HPP
#define VEMOCP_ANALYSIS_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vemocp/ocp.hpp"

namespace vemocp {

struct RunRecord {
  double h = 0.0;
  int ndof = 0;
  double errY_L2 = 0.0, errY_en = 0.0;
  double errP_L2 = 0.0, errP_en = 0.0;
  double errU_L2 = 0.0;
  double Jh = 0.0;
};

struct ErrorReport {
  std::vector<RunRecord> rows;
  std::map<std::string, double> slopes;      // least-squares per error column
  std::map<std::string, int> excluded_rows;  // dropped by the precision floor
};

/// sqrt(sum_E ||Pi0k v_h - v||^2) for a state or adjoint DOF vector.
double l2_error_state(const Discretization& d, const Eigen::VectorXd& dofs, const ScalarFn& exact);

/// sqrt(sum_E ||sqrt(kappa)(grad PiNabla v_h - grad v)||^2
///            + ||sqrt(gamma)(Pi0k v_h - v)||^2).
double energy_error(const Discretization& d, const Eigen::VectorXd& dofs, const ScalarFn& exact,
                    const VecFn& grad_exact);

/// ||u_h - u|| on Gamma_C by edgewise Gauss quadrature.
double control_error(const Discretization& d, const Eigen::VectorXd& u, const ScalarFn& exact);

/// Least-squares slope of log(err) against log(h). Rows with errors below
/// the precision floor are excluded (their count is reported); returns NaN
/// when fewer than two usable rows remain.
double fit_rate(const std::vector<double>& h, const std::vector<double>& err,
                double floor = 1e-11, int* excluded = nullptr);

/// Fills report.slopes (and exclusion counts) from report.rows.
void fit_rates(ErrorReport& report, double floor = 1e-11);

void write_csv(const ErrorReport& report, const std::string& path);
void write_rates_json(const ErrorReport& report, const std::string& path);

/// A solved problem kept around as a comparison reference: errors of coarse
/// solutions are measured against the cellwise polynomial projections of
/// this solution, located by point search in its (finer) mesh.
class ReferenceSolution {
public:
  ReferenceSolution(std::shared_ptr<const PolyMesh> mesh, Discretization disc, SolutionTriple sol);

  double y_value(const Point& x) const;
  double p_value(const Point& x) const;
  Eigen::Vector2d y_gradient(const Point& x) const;
  Eigen::Vector2d p_gradient(const Point& x) const;
  double u_value(const Point& x) const;
  const SolutionTriple& solution() const { return sol_; }
  const Discretization& discretization() const { return disc_; }

private:
  int locate(const Point& x) const;
  std::shared_ptr<const PolyMesh> mesh_;
  Discretization disc_;
  SolutionTriple sol_;
  // uniform background grid over the bounding box for point location
  double bx0_, by0_, hx_, hy_;
  int nx_, ny_;
  std::vector<std::vector<int>> bins_;
};

/// Errors of a coarse solution measured against the reference, evaluated by
/// quadrature on the coarse mesh.
RunRecord reference_errors(const Discretization& d, const SolutionTriple& sol,
                           const ReferenceSolution& ref);

} // namespace vemocp

#endif
