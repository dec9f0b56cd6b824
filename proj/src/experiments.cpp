#include "vemocp/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

namespace vemocp {

namespace {

PolyMesh make_test1_mesh(const ConvergenceSpec& spec, size_t level_index) {
  const Rect dom = presets::test1_domain();
  const TagRule tags = presets::test1_tags();
  if (spec.family == "cartesian") {
    const int n = spec.levels[level_index];
    return generate_cartesian(n, n, dom, tags);
  }
  if (spec.family == "star") {
    const int n = spec.levels[level_index];
    return generate_star(n, dom, tags, spec.star_indent);
  }
  if (spec.family == "imported") {
    if (level_index >= spec.mesh_files.size())
      throw std::runtime_error("run_convergence: not enough mesh files for the levels");
    return load_mesh(spec.mesh_files[level_index]);
  }
  throw std::runtime_error("run_convergence: unknown mesh family '" + spec.family + "'");
}

} // namespace

std::vector<ErrorReport> run_convergence(const ConvergenceSpec& spec) {
  if (spec.levels.empty() && spec.family != "imported")
    throw std::runtime_error("run_convergence: need at least one level");
  const size_t n_levels = spec.family == "imported" ? spec.mesh_files.size() : spec.levels.size();
  std::vector<ErrorReport> reports;
  for (int k : spec.orders) {
    ErrorReport report;
    for (size_t lv = 0; lv < n_levels; ++lv) {
      PolyMesh mesh = make_test1_mesh(spec, lv);
      OcpConfig cfg = presets::test1(k, spec.k_u, spec.sigma, spec.scheme);
      Discretization d = discretize(mesh, cfg);
      SaddleSystem sys = assemble(d);
      SolutionTriple sol = solve(sys, cfg.solver_tol);
      const auto& ex = *cfg.exact;
      RunRecord r;
      r.h = mesh.mesh_size();
      r.ndof = sys.dim();
      r.errY_L2 = l2_error_state(d, sol.y, ex.y);
      r.errP_L2 = l2_error_state(d, sol.p, ex.p);
      r.errY_en = energy_error(d, sol.y, ex.y, ex.grad_y);
      r.errP_en = energy_error(d, sol.p, ex.p, ex.grad_p);
      r.errU_L2 = control_error(d, sol.u, ex.u);
      r.Jh = evaluate_functional(d, sol);
      report.rows.push_back(r);
    }
    fit_rates(report);
    if (!spec.out_prefix.empty()) {
      const std::string base = spec.out_prefix + "_" + spec.family + "_k" + std::to_string(k);
      write_csv(report, base + ".csv");
      write_rates_json(report, base + ".rates.json");
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

ReferenceSolution make_test2_reference(int nx, int ny, int k, double sigma) {
  // y = 0.2, y = 0.8 and x = 1 must land on grid lines so the mesh
  // conforms to the observation strips and the control corners.
  if (ny % 5 != 0) throw std::runtime_error("make_test2_reference: ny must be a multiple of 5");
  if (nx % 2 != 0) throw std::runtime_error("make_test2_reference: nx must be even");
  auto mesh = std::make_shared<PolyMesh>(generate_cartesian(
      nx, ny, presets::test2_domain(), presets::test2_tags(), presets::test2_obs()));
  OcpConfig cfg = presets::test2(k, 0, sigma, Scheme::Stabilized);
  Discretization d = discretize(*mesh, cfg);
  SaddleSystem sys = assemble(d);
  SolutionTriple sol = solve(sys, cfg.solver_tol);
  return ReferenceSolution(mesh, std::move(d), std::move(sol));
}

namespace {

SweepRow run_test2_case(const PolyMesh& mesh, const std::string& mesh_name, int k, int k_u,
                        std::optional<double> sigma, const ReferenceSolution& ref) {
  const Scheme scheme = sigma ? Scheme::Stabilized : Scheme::StabFree;
  OcpConfig cfg = presets::test2(k, k_u, sigma.value_or(1.0), scheme);
  Discretization d = discretize(mesh, cfg);
  SaddleSystem sys = assemble(d);
  SolutionTriple sol = solve(sys, cfg.solver_tol);
  SweepRow row;
  row.mesh = mesh_name;
  row.k = k;
  row.sigma = sigma;
  row.rec = reference_errors(d, sol, ref);
  row.rec.ndof = sys.dim();
  row.rec.Jh = evaluate_functional(d, sol);
  char buf[512];
  if (sigma)
    std::snprintf(buf, sizeof(buf),
                  "vemocp solve --mesh %s --preset test2 --order %d --sigma %g", mesh_name.c_str(),
                  k, *sigma);
  else
    std::snprintf(buf, sizeof(buf),
                  "vemocp solve --mesh %s --preset test2 --order %d --scheme stabfree",
                  mesh_name.c_str(), k);
  row.repro = buf;
  return row;
}

} // namespace

std::vector<SweepRow> run_sigma_sweep(const SweepSpec& spec, const ReferenceSolution* shared_ref) {
  if (spec.mesh_files.empty()) throw std::runtime_error("run_sigma_sweep: no meshes given");
  std::optional<ReferenceSolution> own_ref;
  const ReferenceSolution* ref = shared_ref;
  if (!ref) {
    own_ref.emplace(make_test2_reference(spec.ref_nx, spec.ref_ny, spec.ref_k));
    ref = &*own_ref;
  }
  std::vector<SweepRow> rows;
  for (const auto& mf : spec.mesh_files) {
    PolyMesh mesh = load_mesh(mf);
    for (int k : spec.orders)
      for (double s : spec.sigmas) rows.push_back(run_test2_case(mesh, mf, k, spec.k_u, s, *ref));
  }
  if (!spec.out_dir.empty()) {
    std::filesystem::create_directories(spec.out_dir);
    write_sweep_csv(rows, spec.out_dir + "/sigma_sweep.csv");
  }
  return rows;
}

StabFreeComparison run_stabfree_compare(const SweepSpec& spec, const ReferenceSolution* shared_ref,
                                        double factor) {
  std::optional<ReferenceSolution> own_ref;
  const ReferenceSolution* ref = shared_ref;
  if (!ref) {
    own_ref.emplace(make_test2_reference(spec.ref_nx, spec.ref_ny, spec.ref_k));
    ref = &*own_ref;
  }
  SweepSpec k1 = spec;
  k1.orders = {1};
  k1.out_dir.clear();
  StabFreeComparison cmp;
  cmp.factor = factor;
  cmp.rows = run_sigma_sweep(k1, ref);
  for (const auto& mf : spec.mesh_files) {
    PolyMesh mesh = load_mesh(mf);
    cmp.rows.push_back(run_test2_case(mesh, mf, 1, 1, std::nullopt, *ref));
    const SweepRow& sf = cmp.rows.back();
    // Column-wise minimum over sigma of the stabilized k=1 errors.
    RunRecord best;
    best.errY_L2 = best.errY_en = best.errP_L2 = best.errP_en = best.errU_L2 = 1e300;
    for (const auto& row : cmp.rows) {
      if (row.mesh != mf || !row.sigma) continue;
      best.errY_L2 = std::min(best.errY_L2, row.rec.errY_L2);
      best.errY_en = std::min(best.errY_en, row.rec.errY_en);
      best.errP_L2 = std::min(best.errP_L2, row.rec.errP_L2);
      best.errP_en = std::min(best.errP_en, row.rec.errP_en);
      best.errU_L2 = std::min(best.errU_L2, row.rec.errU_L2);
    }
    StabFreeComparison::Verdict v;
    v.mesh = mf;
    v.worst_ratio = std::max({sf.rec.errY_L2 / best.errY_L2, sf.rec.errY_en / best.errY_en,
                              sf.rec.errP_L2 / best.errP_L2, sf.rec.errP_en / best.errP_en,
                              sf.rec.errU_L2 / best.errU_L2});
    v.within_factor = v.worst_ratio <= factor;
    cmp.verdicts.push_back(v);
  }
  if (!spec.out_dir.empty()) {
    std::filesystem::create_directories(spec.out_dir);
    write_sweep_csv(cmp.rows, spec.out_dir + "/stabfree_compare.csv");
  }
  return cmp;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  std::fprintf(f, "mesh,k,sigma,scheme,ndof,errY_L2,errY_en,errP_L2,errP_en,errU_L2,Jh\n");
  for (const auto& r : rows) {
    if (r.sigma)
      std::fprintf(f, "%s,%d,%.12g,stabilized,", r.mesh.c_str(), r.k, *r.sigma);
    else
      std::fprintf(f, "%s,%d,,stabfree,", r.mesh.c_str(), r.k);
    std::fprintf(f, "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.rec.ndof, r.rec.errY_L2,
                 r.rec.errY_en, r.rec.errP_L2, r.rec.errP_en, r.rec.errU_L2, r.rec.Jh);
  }
  std::fclose(f);
  // A reproduction command per CSV row, one line each.
  std::FILE* g = std::fopen((path + ".repro.txt").c_str(), "w");
  if (g) {
    for (const auto& r : rows) std::fprintf(g, "%s\n", r.repro.c_str());
    std::fclose(g);
  }
}

} // namespace vemocp
