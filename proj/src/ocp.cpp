#include "vemocp/ocp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include <Eigen/SparseLU>
#include <json.hpp>

#include "vemocp/expr.hpp"

namespace vemocp {

using json = nlohmann::json;

void OcpConfig::check() const {
  if (k < 1) throw std::runtime_error("config: k must be >= 1");
  if (alpha <= 0.0) throw std::runtime_error("config: alpha must be positive");
  if (scheme == Scheme::Stabilized && sigma <= 0.0)
    throw std::runtime_error("config: sigma must be positive");
  if (scheme == Scheme::StabFree && k != 1)
    throw std::runtime_error("config: the stabilization-free scheme is available only for k=1");
  if (!kappa || !gamma) throw std::runtime_error("config: kappa and gamma are required");
}

ControlSpace build_control_space(const PolyMesh& mesh, int k_u) {
  if (k_u < 1) throw std::runtime_error("control space: k_u must be >= 1");
  ControlSpace cs;
  cs.k_u = k_u;
  cs.edges = mesh.edges_with_tag(BoundaryTag::Control);
  std::map<int, int> vertex_dof;
  const Eigen::VectorXd t = trace_nodes(k_u);
  for (int e : cs.edges) {
    const Edge& ed = mesh.edge(e);
    std::vector<int> dofs(k_u + 1);
    for (int side = 0; side < 2; ++side) {
      const int v = side == 0 ? ed.v0 : ed.v1;
      auto it = vertex_dof.find(v);
      if (it == vertex_dof.end()) {
        it = vertex_dof.emplace(v, cs.n_dofs++).first;
        cs.dof_points.push_back(mesh.vertex(v));
      }
      dofs[side == 0 ? 0 : k_u] = it->second;
    }
    const Point a = mesh.vertex(ed.v0), b = mesh.vertex(ed.v1);
    for (int m = 1; m < k_u; ++m) {
      dofs[m] = cs.n_dofs++;
      cs.dof_points.push_back(a + t(m) * (b - a));
    }
    cs.edge_dofs.push_back(dofs);
    cs.total_length += (b - a).norm();
  }
  return cs;
}

SpMat control_mass(const PolyMesh& mesh, const ControlSpace& cs) {
  if (cs.edges.empty()) throw std::runtime_error("control_mass: empty control boundary");
  std::vector<Eigen::Triplet<double>> trips;
  const int n1d = cs.k_u + 2;
  auto [g, w] = gauss_legendre(n1d);
  Eigen::VectorXd t(n1d);
  for (int q = 0; q < n1d; ++q) t(q) = 0.5 * (g(q) + 1.0);
  const Eigen::MatrixXd L = trace_basis(cs.k_u, t);
  for (size_t ie = 0; ie < cs.edges.size(); ++ie) {
    const Edge& ed = mesh.edge(cs.edges[ie]);
    const double len = (mesh.vertex(ed.v1) - mesh.vertex(ed.v0)).norm();
    for (int a = 0; a <= cs.k_u; ++a)
      for (int b = 0; b <= cs.k_u; ++b) {
        double v = 0.0;
        for (int q = 0; q < n1d; ++q) v += 0.5 * w(q) * len * L(q, a) * L(q, b);
        trips.emplace_back(cs.edge_dofs[ie][a], cs.edge_dofs[ie][b], v);
      }
  }
  SpMat M(cs.n_dofs, cs.n_dofs);
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

SpMat control_coupling(const PolyMesh& mesh, const ControlSpace& cs, const DofLayout& layout) {
  const int k = layout.k;
  std::vector<Eigen::Triplet<double>> trips;
  const int n1d = (k + cs.k_u) / 2 + 2;
  auto [g, w] = gauss_legendre(n1d);
  Eigen::VectorXd t(n1d);
  for (int q = 0; q < n1d; ++q) t(q) = 0.5 * (g(q) + 1.0);
  const Eigen::MatrixXd Ltr = trace_basis(k, t);
  const Eigen::MatrixXd Lu = trace_basis(cs.k_u, t);
  for (size_t ie = 0; ie < cs.edges.size(); ++ie) {
    const int e = cs.edges[ie];
    const Edge& ed = mesh.edge(e);
    const double len = (mesh.vertex(ed.v1) - mesh.vertex(ed.v0)).norm();
    // V_h trace dofs along the canonical edge direction.
    std::vector<int> tr(k + 1);
    tr[0] = layout.vertex_dof(ed.v0);
    for (int m = 0; m < k - 1; ++m) tr[m + 1] = layout.edge_dof(e, m);
    tr[k] = layout.vertex_dof(ed.v1);
    for (int a = 0; a <= k; ++a)
      for (int b = 0; b <= cs.k_u; ++b) {
        double v = 0.0;
        for (int q = 0; q < n1d; ++q) v += 0.5 * w(q) * len * Ltr(q, a) * Lu(q, b);
        trips.emplace_back(tr[a], cs.edge_dofs[ie][b], v);
      }
  }
  SpMat C(layout.n_total, cs.n_dofs);
  C.setFromTriplets(trips.begin(), trips.end());
  return C;
}

Discretization discretize(const PolyMesh& mesh, OcpConfig cfg) {
  cfg.check();
  Discretization d;
  d.mesh = &mesh;
  d.cfg = cfg;
  d.layout = dof_layout(mesh, cfg.k);
  d.control = build_control_space(mesh, cfg.control_degree());
  d.cells.reserve(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    CellOps ops;
    ops.ctx = cell_context(mesh, c, cfg.k);
    ops.proj = build_projectors(ops.ctx);
    if (cfg.scheme == Scheme::StabFree) {
      StabFreeProjector sf = build_stabfree_projectors(ops.ctx, ops.proj, select_ell(ops.ctx));
      ops.A = local_stiffness_stabfree(ops.ctx, sf, cfg.kappa, cfg.gamma);
      ops.stabfree = std::move(sf);
    } else {
      ops.A = local_stiffness(ops.ctx, ops.proj, cfg.kappa, cfg.gamma, cfg.sigma);
    }
    if (mesh.obs_flag(c)) ops.M = local_obs_mass(ops.proj);
    d.cells.push_back(std::move(ops));
  }
  return d;
}

namespace {

// Positions of the vertex/edge dofs (moment dofs have no point).
Point dof_position(const PolyMesh& mesh, const DofLayout& layout, int g) {
  if (g < layout.n_vertex) return mesh.vertex(g);
  const int k = layout.k;
  const int e = (g - layout.n_vertex) / (k - 1);
  const int m = (g - layout.n_vertex) % (k - 1);
  const Eigen::VectorXd t = trace_nodes(k);
  const Point a = mesh.vertex(mesh.edge(e).v0), b = mesh.vertex(mesh.edge(e).v1);
  return a + t(m + 1) * (b - a);
}

} // namespace

SaddleSystem assemble(const Discretization& d) {
  const PolyMesh& mesh = *d.mesh;
  const DofLayout& L = d.layout;
  SaddleSystem sys;
  sys.free_index.assign(L.n_total, -1);
  sys.dir_index.assign(L.n_total, -1);
  for (int g = 0; g < L.n_total; ++g) {
    if (L.on_dirichlet[g]) {
      sys.dir_index[g] = static_cast<int>(sys.dir_dofs.size());
      sys.dir_dofs.push_back(g);
    } else {
      sys.free_index[g] = sys.n_free++;
    }
  }
  sys.n_dir = static_cast<int>(sys.dir_dofs.size());
  sys.n_u = d.control.n_dofs;
  sys.dir_values.resize(sys.n_dir);
  for (int i = 0; i < sys.n_dir; ++i)
    sys.dir_values(i) = d.cfg.g ? d.cfg.g(dof_position(mesh, L, sys.dir_dofs[i])) : 0.0;

  sys.MC = control_mass(mesh, d.control);
  sys.C = control_coupling(mesh, d.control, L);
  sys.alpha = d.cfg.alpha;

  const int N = sys.dim();
  const int uo = sys.u_off(), po = sys.p_off();
  std::vector<Eigen::Triplet<double>> trips, ah_ff, ah_fd;
  sys.rhs = Eigen::VectorXd::Zero(N);

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellOps& ops = d.cells[c];
    const auto& dofs = L.cell_dofs[c];
    const int n = static_cast<int>(dofs.size());
    auto [load_f, load_yd] = local_loads(ops.ctx, ops.proj, d.cfg.f,
                                         mesh.obs_flag(c) ? d.cfg.y_d : ScalarFn());
    for (int i = 0; i < n; ++i) {
      const int gi = dofs[i];
      const int fi = sys.free_index[gi];
      if (fi < 0) continue;
      sys.rhs(po + fi) += load_f(i);
      if (mesh.obs_flag(c)) sys.rhs(fi) += load_yd(i);
      for (int j = 0; j < n; ++j) {
        const int gj = dofs[j];
        const int fj = sys.free_index[gj];
        const double a = ops.A(i, j);
        if (fj >= 0) {
          if (a != 0.0) {
            trips.emplace_back(po + fi, fj, a); // state equation rows
            trips.emplace_back(fi, po + fj, a); // adjoint coupling rows
            ah_ff.emplace_back(fi, fj, a);
          }
          if (mesh.obs_flag(c) && ops.M(i, j) != 0.0) trips.emplace_back(fi, fj, ops.M(i, j));
        } else {
          const int dj = sys.dir_index[gj];
          if (a != 0.0) {
            sys.rhs(po + fi) -= a * sys.dir_values(dj);
            ah_fd.emplace_back(fi, dj, a);
          }
          if (mesh.obs_flag(c)) sys.rhs(fi) -= ops.M(i, j) * sys.dir_values(dj);
        }
      }
    }
  }

  for (int col = 0; col < sys.C.outerSize(); ++col)
    for (SpMat::InnerIterator it(sys.C, col); it; ++it) {
      const int fr = sys.free_index[it.row()];
      if (fr < 0) continue; // constrained adjoint trace values vanish
      trips.emplace_back(po + fr, uo + col, -it.value());
      trips.emplace_back(uo + col, po + fr, -it.value());
    }
  for (int col = 0; col < sys.MC.outerSize(); ++col)
    for (SpMat::InnerIterator it(sys.MC, col); it; ++it)
      trips.emplace_back(uo + it.row(), uo + col, d.cfg.alpha * it.value());

  sys.M.resize(N, N);
  sys.M.setFromTriplets(trips.begin(), trips.end());
  sys.M.makeCompressed();
  sys.Ah_ff.resize(sys.n_free, sys.n_free);
  sys.Ah_ff.setFromTriplets(ah_ff.begin(), ah_ff.end());
  sys.Ah_fd.resize(sys.n_free, sys.n_dir);
  sys.Ah_fd.setFromTriplets(ah_fd.begin(), ah_fd.end());
  return sys;
}

SolutionTriple solve(const SaddleSystem& sys, double tol) {
  Eigen::SparseLU<SpMat> lu;
  lu.compute(sys.M);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solve: sparse factorization breakdown (singular KKT system)");
  Eigen::VectorXd z = lu.solve(sys.rhs);
  SolutionTriple sol;
  sol.rhs_norm = sys.rhs.norm();
  // Iterative refinement recovers the digits a single factorized solve
  // loses on the larger systems.
  double res = (sys.M * z - sys.rhs).norm();
  for (int it = 0; it < 3 && res > 0.1 * tol * sol.rhs_norm; ++it) {
    z += lu.solve(sys.rhs - sys.M * z);
    res = (sys.M * z - sys.rhs).norm();
  }
  sol.kkt_residual = sol.rhs_norm > 0.0 ? res / sol.rhs_norm : res;
  if (sol.kkt_residual > tol) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", sol.kkt_residual);
    throw std::runtime_error(std::string("solve: relative KKT residual ") + buf +
                             " exceeds tolerance");
  }
  const int nvh = static_cast<int>(sys.free_index.size());
  sol.y.resize(nvh);
  sol.p.resize(nvh);
  for (int g = 0; g < nvh; ++g) {
    const int f = sys.free_index[g];
    if (f >= 0) {
      sol.y(g) = z(f);
      sol.p(g) = z(sys.p_off() + f);
    } else {
      sol.y(g) = sys.dir_values(sys.dir_index[g]);
      sol.p(g) = 0.0;
    }
  }
  sol.u = z.segment(sys.u_off(), sys.n_u);
  // Discrete optimality condition alpha u - p = 0 on Gamma_C, in weak form.
  sol.optimality_residual = (sys.alpha * (sys.MC * sol.u) - sys.C.transpose() * sol.p).norm();
  return sol;
}

double evaluate_functional(const Discretization& d, const SolutionTriple& sol) {
  double J = 0.0;
  for (int c = 0; c < d.mesh->n_cells(); ++c) {
    if (!d.mesh->obs_flag(c)) continue;
    const CellOps& ops = d.cells[c];
    const auto& dofs = d.layout.cell_dofs[c];
    Eigen::VectorXd loc(dofs.size());
    for (size_t i = 0; i < dofs.size(); ++i) loc(i) = sol.y(dofs[i]);
    Eigen::VectorXd coeff = ops.proj.Pi0k * loc;
    QuadratureRule rule = cell_rule(ops.ctx.geom, 2 * d.cfg.k + 6);
    Eigen::MatrixXd vals = eval_basis(ops.ctx.basis, rule.points);
    for (int q = 0; q < rule.size(); ++q) {
      const double diff = vals.row(q).dot(coeff) - d.cfg.y_d(rule.points.row(q).transpose());
      J += 0.5 * rule.weights(q) * diff * diff;
    }
  }
  SpMat MC = control_mass(*d.mesh, d.control);
  J += 0.5 * d.cfg.alpha * sol.u.dot(MC * sol.u);
  return J;
}

Eigen::VectorXd solve_state(const Discretization& d, const SaddleSystem& sys, const ScalarFn& f,
                            const std::function<double(const Point&, const Point&)>& flux,
                            const ScalarFn& g) {
  const PolyMesh& mesh = *d.mesh;
  const DofLayout& L = d.layout;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.n_free);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    auto [load_f, unused] = local_loads(d.cells[c].ctx, d.cells[c].proj, f, ScalarFn());
    const auto& dofs = L.cell_dofs[c];
    for (size_t i = 0; i < dofs.size(); ++i)
      if (sys.free_index[dofs[i]] >= 0) rhs(sys.free_index[dofs[i]]) += load_f(i);
  }
  if (flux) {
    const int k = L.k;
    for (int e = 0; e < mesh.n_edges(); ++e) {
      const Edge& ed = mesh.edge(e);
      if (ed.tag != BoundaryTag::Neumann && ed.tag != BoundaryTag::Control) continue;
      const Point a = mesh.vertex(ed.v0), b = mesh.vertex(ed.v1);
      // Outward normal: the incident cell traverses the edge CCW.
      const auto& loop = mesh.cell(ed.cells[0]);
      Point ta = a, tb = b;
      for (size_t i = 0; i < loop.size(); ++i)
        if (loop[i] == ed.v1 && loop[(i + 1) % loop.size()] == ed.v0) std::swap(ta, tb);
      Point tang = (tb - ta).normalized();
      Point normal(tang.y(), -tang.x());
      const int n1d = k + 4;
      auto [gq, wq] = gauss_legendre(n1d);
      Eigen::VectorXd t(n1d);
      for (int q = 0; q < n1d; ++q) t(q) = 0.5 * (gq(q) + 1.0);
      const Eigen::MatrixXd Lt = trace_basis(k, t);
      std::vector<int> tr(k + 1);
      tr[0] = ed.v0;
      for (int m = 0; m < k - 1; ++m) tr[m + 1] = L.edge_dof(e, m);
      tr[k] = ed.v1;
      if (ta != a) std::reverse(tr.begin(), tr.end()); // trace params follow ta -> tb
      const double len = (b - a).norm();
      for (int q = 0; q < n1d; ++q) {
        const Point x = ta + t(q) * (tb - ta);
        const double fv = flux(x, normal) * 0.5 * wq(q) * len;
        for (int aix = 0; aix <= k; ++aix)
          if (sys.free_index[tr[aix]] >= 0) rhs(sys.free_index[tr[aix]]) += fv * Lt(q, aix);
      }
    }
  }
  Eigen::VectorXd gdir = Eigen::VectorXd::Zero(sys.n_dir);
  if (g)
    for (int i = 0; i < sys.n_dir; ++i) gdir(i) = g(dof_position(mesh, L, sys.dir_dofs[i]));
  rhs -= sys.Ah_fd * gdir;

  Eigen::SimplicialLDLT<SpMat> ldlt(sys.Ah_ff);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("solve_state: factorization breakdown");
  Eigen::VectorXd yf = ldlt.solve(rhs);
  Eigen::VectorXd y(L.n_total);
  for (int gdof = 0; gdof < L.n_total; ++gdof)
    y(gdof) = sys.free_index[gdof] >= 0 ? yf(sys.free_index[gdof]) : gdir(sys.dir_index[gdof]);
  return y;
}

PolyMesh retag(const PolyMesh& mesh, const TagRule& rule) {
  std::vector<Point> verts;
  for (int v = 0; v < mesh.n_vertices(); ++v) verts.push_back(mesh.vertex(v));
  std::vector<std::vector<int>> cells;
  for (int c = 0; c < mesh.n_cells(); ++c) cells.push_back(mesh.cell(c));
  std::vector<std::tuple<int, int, BoundaryTag>> tags;
  for (const auto& e : mesh.edges()) {
    if (!e.on_boundary()) continue;
    Point mid = 0.5 * (mesh.vertex(e.v0) + mesh.vertex(e.v1));
    tags.emplace_back(e.v0, e.v1, rule(mid));
  }
  std::vector<bool> obs;
  for (int c = 0; c < mesh.n_cells(); ++c) obs.push_back(mesh.obs_flag(c));
  return PolyMesh(std::move(verts), std::move(cells), tags, std::move(obs));
}

namespace {

ScalarFn expr_field(const json& j, const std::string& key, bool required) {
  if (!j.contains(key)) {
    if (required) throw std::runtime_error("config: missing field '" + key + "'");
    return ScalarFn();
  }
  if (j.at(key).is_number()) {
    const double v = j.at(key).get<double>();
    return [v](const Point&) { return v; };
  }
  Expr e = parse_expr(j.at(key).get<std::string>());
  return [e](const Point& x) { return e(x); };
}

} // namespace

ParsedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json j;
  in >> j;
  ParsedConfig pc;
  OcpConfig& c = pc.cfg;
  c.k = j.value("k", 1);
  c.k_u = j.value("k_u", 0);
  c.sigma = j.value("sigma", 1.0);
  c.alpha = j.value("alpha", 1.0);
  const std::string scheme = j.value("scheme", "stabilized");
  if (scheme == "stabilized")
    c.scheme = Scheme::Stabilized;
  else if (scheme == "stabfree")
    c.scheme = Scheme::StabFree;
  else
    throw std::runtime_error("config: scheme must be 'stabilized' or 'stabfree'");
  c.kappa = expr_field(j, "kappa", true);
  c.gamma = expr_field(j, "gamma", true);
  c.f = expr_field(j, "f", false);
  c.y_d = expr_field(j, "y_d", true);
  c.g = expr_field(j, "g", false);
  if (j.contains("tags")) {
    const json& t = j.at("tags");
    ScalarFn ctrl = expr_field(t, "control", false);
    ScalarFn neum = expr_field(t, "neumann", false);
    pc.tags = [ctrl, neum](const Point& mid) {
      if (ctrl && ctrl(mid) > 0.5) return BoundaryTag::Control;
      if (neum && neum(mid) > 0.5) return BoundaryTag::Neumann;
      return BoundaryTag::Dirichlet;
    };
  }
  if (j.contains("exact")) {
    const json& e = j.at("exact");
    OcpConfig::Exact ex;
    ex.y = expr_field(e, "y", true);
    ex.p = expr_field(e, "p", true);
    ex.u = expr_field(e, "u", true);
    if (e.contains("grad_y")) {
      ScalarFn gx = [f = parse_expr(e.at("grad_y").at(0).get<std::string>())](const Point& x) { return f(x); };
      ScalarFn gy = [f = parse_expr(e.at("grad_y").at(1).get<std::string>())](const Point& x) { return f(x); };
      ex.grad_y = [gx, gy](const Point& x) { return Eigen::Vector2d(gx(x), gy(x)); };
    }
    if (e.contains("grad_p")) {
      ScalarFn gx = [f = parse_expr(e.at("grad_p").at(0).get<std::string>())](const Point& x) { return f(x); };
      ScalarFn gy = [f = parse_expr(e.at("grad_p").at(1).get<std::string>())](const Point& x) { return f(x); };
      ex.grad_p = [gx, gy](const Point& x) { return Eigen::Vector2d(gx(x), gy(x)); };
    }
    c.exact = std::move(ex);
  }
  c.check();
  return pc;
}

} // namespace vemocp
