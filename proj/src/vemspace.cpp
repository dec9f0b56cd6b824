#include "vemocp/vemspace.hpp"

#include <cmath>
#include <stdexcept>

namespace vemocp {

int DofLayout::moment_offset(int c) const { return moment_offsets_[c]; }

int DofLayout::n_dirichlet() const {
  int n = 0;
  for (bool b : on_dirichlet) n += b ? 1 : 0;
  return n;
}

DofLayout dof_layout(const PolyMesh& mesh, int k) {
  if (k < 1) throw std::runtime_error("dof_layout: k must be >= 1");
  DofLayout L;
  L.k = k;
  const int nmom = MonomialBasis::dim(k - 2);
  L.n_vertex = mesh.n_vertices();
  L.n_edge_internal = mesh.n_edges() * (k - 1);
  L.n_moment = mesh.n_cells() * nmom;
  L.n_total = L.n_vertex + L.n_edge_internal + L.n_moment;

  L.moment_offsets_.resize(mesh.n_cells());
  int off = L.n_vertex + L.n_edge_internal;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    L.moment_offsets_[c] = off;
    off += nmom;
  }

  L.cell_dofs.resize(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& loop = mesh.cell(c);
    const int nv = static_cast<int>(loop.size());
    auto& dofs = L.cell_dofs[c];
    dofs.reserve(nv * k + nmom);
    for (int i = 0; i < nv; ++i) dofs.push_back(loop[i]);
    for (int i = 0; i < nv; ++i) {
      const int e = mesh.cell_edge(c, i);
      const bool forward = (loop[i] == mesh.edge(e).v0);
      for (int m = 0; m < k - 1; ++m)
        dofs.push_back(L.edge_dof(e, forward ? m : k - 2 - m));
    }
    for (int i = 0; i < nmom; ++i) dofs.push_back(L.moment_offsets_[c] + i);
  }

  L.on_dirichlet.assign(L.n_total, false);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (mesh.edge(e).tag != BoundaryTag::Dirichlet) continue;
    L.on_dirichlet[mesh.edge(e).v0] = true;
    L.on_dirichlet[mesh.edge(e).v1] = true;
    for (int m = 0; m < k - 1; ++m) L.on_dirichlet[L.edge_dof(e, m)] = true;
  }
  return L;
}

Eigen::VectorXd trace_nodes(int k) {
  Eigen::VectorXd t(k + 1);
  Eigen::VectorXd gl = gauss_lobatto(k + 1);
  for (int i = 0; i <= k; ++i) t(i) = 0.5 * (gl(i) + 1.0);
  t(0) = 0.0;
  t(k) = 1.0;
  return t;
}

Eigen::MatrixXd trace_basis(int k, const Eigen::VectorXd& t) {
  const Eigen::VectorXd nodes = trace_nodes(k);
  const int n = k + 1;
  Eigen::MatrixXd L(t.size(), n);
  for (int p = 0; p < t.size(); ++p)
    for (int j = 0; j < n; ++j) {
      double v = 1.0;
      for (int i = 0; i < n; ++i)
        if (i != j) v *= (t(p) - nodes(i)) / (nodes(j) - nodes(i));
      L(p, j) = v;
    }
  return L;
}

CellContext cell_context(const PolyMesh& mesh, int c, int k) {
  CellContext ctx;
  ctx.cell = c;
  ctx.k = k;
  ctx.geom = cell_geometry(mesh, c);
  ctx.basis = MonomialBasis{ctx.geom.centroid, ctx.geom.diameter, k};
  const auto& loop = mesh.cell(c);
  const int nv = static_cast<int>(loop.size());
  for (int i = 0; i < nv; ++i) ctx.verts.push_back(mesh.vertex(loop[i]));
  ctx.n_dof = nv * k + MonomialBasis::dim(k - 2);
  ctx.edge_nodes.resize(nv);
  for (int i = 0; i < nv; ++i) {
    auto& nodes = ctx.edge_nodes[i];
    nodes.push_back(i);
    for (int m = 0; m < k - 1; ++m) nodes.push_back(nv + i * (k - 1) + m);
    nodes.push_back((i + 1) % nv);
  }
  return ctx;
}

namespace {

// Accumulates, for every monomial row, the boundary integrals against the
// edge traces of the basis functions: out[r, a] += sum_e int_e f_r L_a ds,
// where f_r is provided per edge quadrature point.
struct EdgeQuadrature {
  Eigen::Matrix<double, Eigen::Dynamic, 2> pts;
  Eigen::VectorXd w;
  Eigen::MatrixXd L; // trace basis values at the quadrature parameters
  Point normal;
  double length;
};

std::vector<EdgeQuadrature> edge_quadratures(const CellContext& ctx, int exactness) {
  const int nv = ctx.n_vertex_dofs();
  std::vector<EdgeQuadrature> out(nv);
  const int n1d = exactness / 2 + 1;
  auto [g, w] = gauss_legendre(n1d);
  Eigen::VectorXd t(n1d);
  for (int q = 0; q < n1d; ++q) t(q) = 0.5 * (g(q) + 1.0);
  const Eigen::MatrixXd L = trace_basis(ctx.k, t);
  for (int i = 0; i < nv; ++i) {
    const Point& a = ctx.verts[i];
    const Point& b = ctx.verts[(i + 1) % nv];
    const double len = (b - a).norm();
    EdgeQuadrature eq;
    eq.length = len;
    Point tang = (b - a) / len;
    eq.normal = Point(tang.y(), -tang.x()); // outward for a CCW loop
    eq.pts.resize(n1d, 2);
    eq.w.resize(n1d);
    for (int q = 0; q < n1d; ++q) {
      eq.pts.row(q) = (a + t(q) * (b - a)).transpose();
      eq.w(q) = 0.5 * w(q) * len;
    }
    eq.L = L;
    out[i] = std::move(eq);
  }
  return out;
}

} // namespace

Eigen::MatrixXd build_dof_matrix(const CellContext& ctx) {
  const int k = ctx.k;
  const int nv = ctx.n_vertex_dofs();
  const int nk = MonomialBasis::dim(k);
  const int nmom = MonomialBasis::dim(k - 2);
  Eigen::MatrixXd D(ctx.n_dof, nk);

  Eigen::Matrix<double, Eigen::Dynamic, 2> vpts(nv, 2);
  for (int i = 0; i < nv; ++i) vpts.row(i) = ctx.verts[i].transpose();
  D.topRows(nv) = eval_basis(ctx.basis, vpts);

  if (k >= 2) {
    const Eigen::VectorXd t = trace_nodes(k);
    for (int i = 0; i < nv; ++i) {
      const Point& a = ctx.verts[i];
      const Point& b = ctx.verts[(i + 1) % nv];
      Eigen::Matrix<double, Eigen::Dynamic, 2> pts(k - 1, 2);
      for (int m = 0; m < k - 1; ++m) pts.row(m) = (a + t(m + 1) * (b - a)).transpose();
      D.middleRows(nv + i * (k - 1), k - 1) = eval_basis(ctx.basis, pts);
    }
  }

  if (nmom > 0) {
    QuadratureRule rule = cell_rule(ctx.geom, 2 * k);
    Eigen::MatrixXd vals = eval_basis(ctx.basis, rule.points);
    for (int b = 0; b < nmom; ++b)
      for (int i = 0; i < nk; ++i)
        D(nv * k + b, i) =
            (rule.weights.array() * vals.col(b).array() * vals.col(i).array()).sum() / ctx.geom.area;
  }
  return D;
}

Eigen::MatrixXd build_pi_nabla(const CellContext& ctx) {
  const int k = ctx.k;
  const int nk = MonomialBasis::dim(k);
  const int nmom = MonomialBasis::dim(k - 2);
  const int nv = ctx.n_vertex_dofs();

  QuadratureRule rule = cell_rule(ctx.geom, 2 * k + 2);
  GradValues grads = eval_grad(ctx.basis, rule.points);
  auto eqs = edge_quadratures(ctx, 2 * k + 2);
  double perimeter = 0.0;
  for (const auto& eq : eqs) perimeter += eq.length;

  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nk, nk);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nk, ctx.n_dof);

  // Stiffness rows r >= 1; row 0 pins the boundary average.
  for (int r = 1; r < nk; ++r)
    for (int i = 0; i < nk; ++i)
      G(r, i) = (rule.weights.array() *
                 (grads.x.col(r).array() * grads.x.col(i).array() +
                  grads.y.col(r).array() * grads.y.col(i).array()))
                    .sum();
  for (int i = 0; i < nv; ++i) {
    const auto& eq = eqs[i];
    Eigen::MatrixXd mvals = eval_basis(ctx.basis, eq.pts);
    for (int c = 0; c < nk; ++c) G(0, c) += (eq.w.array() * mvals.col(c).array()).sum() / perimeter;
  }

  for (int i = 0; i < nv; ++i) {
    const auto& eq = eqs[i];
    GradValues mg = eval_grad(ctx.basis, eq.pts);
    for (int r = 1; r < nk; ++r) {
      Eigen::VectorXd dn = mg.x.col(r) * eq.normal.x() + mg.y.col(r) * eq.normal.y();
      for (int a = 0; a <= k; ++a) {
        const int ldof = ctx.edge_nodes[i][a];
        B(r, ldof) += (eq.w.array() * dn.array() * eq.L.col(a).array()).sum();
      }
    }
    for (int a = 0; a <= k; ++a) {
      const int ldof = ctx.edge_nodes[i][a];
      B(0, ldof) += (eq.w.array() * eq.L.col(a).array()).sum() / perimeter;
    }
  }
  // Volume part of the integration by parts, through the moment DOFs.
  for (int r = 1; r < nk; ++r) {
    if (nmom == 0) break;
    Eigen::VectorXd lap = laplacian_coeffs(ctx.basis, r, nmom);
    for (int b = 0; b < nmom; ++b)
      if (lap(b) != 0.0) B(r, ctx.moment_dof(b)) -= ctx.geom.area * lap(b);
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(G);
  Eigen::MatrixXd pi = lu.solve(B);
  if ((G * pi - B).norm() > 1e-8 * B.norm())
    throw std::runtime_error("build_pi_nabla: singular local system on cell " +
                             std::to_string(ctx.cell));
  return pi;
}

Eigen::MatrixXd build_pi0k(const CellContext& ctx, const Eigen::MatrixXd& pi_nabla,
                           const Eigen::MatrixXd& gram) {
  const int k = ctx.k;
  const int nk = MonomialBasis::dim(k);
  const int nmom = MonomialBasis::dim(k - 2);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nk, ctx.n_dof);
  for (int i = 0; i < nmom; ++i) C(i, ctx.moment_dof(i)) = ctx.geom.area;
  if (nk > nmom) C.bottomRows(nk - nmom) = (gram * pi_nabla).bottomRows(nk - nmom);
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("build_pi0k: monomial Gram matrix not SPD on cell " +
                             std::to_string(ctx.cell));
  return llt.solve(C);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_pi0_grad(const CellContext& ctx,
                                                           const Eigen::MatrixXd& gram) {
  const int k = ctx.k;
  const int nk1 = MonomialBasis::dim(k - 1);
  const int nmom = MonomialBasis::dim(k - 2);
  const int nv = ctx.n_vertex_dofs();
  Eigen::MatrixXd bx = Eigen::MatrixXd::Zero(nk1, ctx.n_dof);
  Eigen::MatrixXd by = Eigen::MatrixXd::Zero(nk1, ctx.n_dof);

  auto eqs = edge_quadratures(ctx, 2 * k + 2);
  for (int i = 0; i < nv; ++i) {
    const auto& eq = eqs[i];
    Eigen::MatrixXd mvals = eval_basis(ctx.basis, eq.pts);
    for (int r = 0; r < nk1; ++r)
      for (int a = 0; a <= k; ++a) {
        const int ldof = ctx.edge_nodes[i][a];
        const double s = (eq.w.array() * mvals.col(r).array() * eq.L.col(a).array()).sum();
        bx(r, ldof) += s * eq.normal.x();
        by(r, ldof) += s * eq.normal.y();
      }
  }
  for (int r = 0; r < nk1 && nmom > 0; ++r) {
    Eigen::VectorXd dx = deriv_coeffs(ctx.basis, r, 0, nmom);
    Eigen::VectorXd dy = deriv_coeffs(ctx.basis, r, 1, nmom);
    for (int b = 0; b < nmom; ++b) {
      if (dx(b) != 0.0) bx(r, ctx.moment_dof(b)) -= ctx.geom.area * dx(b);
      if (dy(b) != 0.0) by(r, ctx.moment_dof(b)) -= ctx.geom.area * dy(b);
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gram.topLeftCorner(nk1, nk1));
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("build_pi0_grad: Gram matrix not SPD on cell " +
                             std::to_string(ctx.cell));
  return {llt.solve(bx), llt.solve(by)};
}

ProjectorSet build_projectors(const CellContext& ctx) {
  ProjectorSet P;
  QuadratureRule rule = cell_rule(ctx.geom, 2 * ctx.k + 2);
  Eigen::MatrixXd vals = eval_basis(ctx.basis, rule.points);
  const int nk = MonomialBasis::dim(ctx.k);
  P.H.resize(nk, nk);
  for (int i = 0; i < nk; ++i)
    for (int j = i; j < nk; ++j) {
      P.H(i, j) = (rule.weights.array() * vals.col(i).array() * vals.col(j).array()).sum();
      P.H(j, i) = P.H(i, j);
    }
  P.D = build_dof_matrix(ctx);
  P.PiNabla = build_pi_nabla(ctx);
  P.Pi0k = build_pi0k(ctx, P.PiNabla, P.H);
  std::tie(P.Pi0GradX, P.Pi0GradY) = build_pi0_grad(ctx, P.H);
  return P;
}

Eigen::VectorXd interpolate(const PolyMesh& mesh, const DofLayout& layout,
                            const std::function<double(const Point&)>& f) {
  const int k = layout.k;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(layout.n_total);
  for (int v = 0; v < mesh.n_vertices(); ++v) out(v) = f(mesh.vertex(v));
  if (k >= 2) {
    const Eigen::VectorXd t = trace_nodes(k);
    for (int e = 0; e < mesh.n_edges(); ++e) {
      const Point& a = mesh.vertex(mesh.edge(e).v0);
      const Point& b = mesh.vertex(mesh.edge(e).v1);
      for (int m = 0; m < k - 1; ++m) out(layout.edge_dof(e, m)) = f(a + t(m + 1) * (b - a));
    }
  }
  const int nmom = MonomialBasis::dim(k - 2);
  if (nmom > 0) {
    for (int c = 0; c < mesh.n_cells(); ++c) {
      CellGeometry geom = cell_geometry(mesh, c);
      MonomialBasis basis{geom.centroid, geom.diameter, k};
      QuadratureRule rule = cell_rule(geom, 2 * k + 6);
      Eigen::MatrixXd vals = eval_basis(basis, rule.points);
      Eigen::VectorXd fv(rule.size());
      for (int q = 0; q < rule.size(); ++q) fv(q) = f(rule.points.row(q).transpose());
      for (int b = 0; b < nmom; ++b)
        out(layout.moment_offset(c) + b) =
            (rule.weights.array() * fv.array() * vals.col(b).array()).sum() / geom.area;
    }
  }
  return out;
}

} // namespace vemocp
