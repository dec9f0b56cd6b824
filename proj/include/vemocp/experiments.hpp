// Experiment drivers behind the CLI: the manufactured-solution convergence
// study, the stabilization-parameter sweep against a fine self-computed
// reference, and the stabilization-free comparison.

#ifndef VEMOCP_EXPERIMENTS_HPP
#define VEMOCP_EXPERIMENTS_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vemocp/analysis.hpp"
#include "vemocp/presets.hpp"

namespace vemocp {

struct ConvergenceSpec {
  std::string family = "cartesian";     // cartesian | star | imported
  std::vector<int> levels = {8, 16, 32, 64};
  std::vector<std::string> mesh_files;  // for family = imported
  std::vector<int> orders = {1, 2, 3, 4};
  int k_u = 0;                          // 0: k_u = k
  double sigma = 1.0;
  Scheme scheme = Scheme::Stabilized;
  double star_indent = 0.2;
  std::string out_prefix;               // empty: no files written
};

/// Solves the test1 problem over the refinement levels, computes all error
/// columns, fits the slopes and (optionally) writes one CSV + rates JSON
/// per order. Returns one report per order.
std::vector<ErrorReport> run_convergence(const ConvergenceSpec& spec);

/// Builds the fine Cartesian reference for the test2 domain (conforming to
/// the observation strips).
ReferenceSolution make_test2_reference(int nx = 256, int ny = 120, int k = 2, double sigma = 1.0);

struct SweepSpec {
  std::vector<std::string> mesh_files;
  std::vector<int> orders = {1, 2, 3, 4};
  std::vector<double> sigmas = {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0};
  int k_u = 0;
  int ref_nx = 256, ref_ny = 120, ref_k = 2;
  std::string out_dir; // empty: no files written
};

struct SweepRow {
  std::string mesh;
  int k = 0;
  std::optional<double> sigma; // empty for the stabilization-free rows
  RunRecord rec;
  std::string repro; // solve invocation reproducing the row
};

std::vector<SweepRow> run_sigma_sweep(const SweepSpec& spec,
                                      const ReferenceSolution* shared_ref = nullptr);

struct StabFreeComparison {
  std::vector<SweepRow> rows; // sweep rows plus one stab-free row per mesh
  // per mesh: stab-free error <= factor * min-over-sigma stabilized error?
  struct Verdict {
    std::string mesh;
    bool within_factor = false;
    double worst_ratio = 0.0;
  };
  std::vector<Verdict> verdicts;
  double factor = 2.0;
};

StabFreeComparison run_stabfree_compare(const SweepSpec& spec,
                                        const ReferenceSolution* shared_ref = nullptr,
                                        double factor = 2.0);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

} // namespace vemocp

#endif
