#include "vemocp/forms.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/QR>

namespace vemocp {

Eigen::MatrixXd dofi_dofi(int n_dof, double sigma) {
  if (sigma <= 0.0) throw std::runtime_error("dofi_dofi: sigma must be positive");
  return sigma * Eigen::MatrixXd::Identity(n_dof, n_dof);
}

namespace {

// Gram matrix of the monomials up to dimension n, weighted by a coefficient
// sampled at the cell quadrature points; also reports max |coeff|.
Eigen::MatrixXd weighted_gram(const QuadratureRule& rule, const Eigen::MatrixXd& vals, int n,
                              const ScalarFn& coeff, double* sup = nullptr) {
  Eigen::VectorXd cv(rule.size());
  double mx = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    cv(q) = coeff(rule.points.row(q).transpose());
    mx = std::max(mx, std::abs(cv(q)));
  }
  if (sup) *sup = mx;
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      G(i, j) = (rule.weights.array() * cv.array() * vals.col(i).array() * vals.col(j).array()).sum();
      G(j, i) = G(i, j);
    }
  return G;
}

} // namespace

Eigen::MatrixXd local_stiffness(const CellContext& ctx, const ProjectorSet& proj,
                                const ScalarFn& kappa, const ScalarFn& gamma, double sigma) {
  const int k = ctx.k;
  const int nk = MonomialBasis::dim(k);
  const int nk1 = MonomialBasis::dim(k - 1);

  QuadratureRule rule = cell_rule(ctx.geom, 2 * k + 2);
  Eigen::MatrixXd vals = eval_basis(ctx.basis, rule.points);
  for (int q = 0; q < rule.size(); ++q)
    if (kappa(rule.points.row(q).transpose()) <= 0.0)
      throw std::runtime_error("local_stiffness: non-positive kappa sample on cell " +
                               std::to_string(ctx.cell));
  double kappa_sup = 0.0, gamma_sup = 0.0;
  Eigen::MatrixXd Gk = weighted_gram(rule, vals, nk1, kappa, &kappa_sup);
  Eigen::MatrixXd Gg = weighted_gram(rule, vals, nk, gamma, &gamma_sup);

  Eigen::MatrixXd A = proj.Pi0GradX.transpose() * Gk * proj.Pi0GradX +
                      proj.Pi0GradY.transpose() * Gk * proj.Pi0GradY +
                      proj.Pi0k.transpose() * Gg * proj.Pi0k;

  // dofi-dofi stabilization of the slack (I - D PiNabla).
  Eigen::MatrixXd slack =
      Eigen::MatrixXd::Identity(ctx.n_dof, ctx.n_dof) - proj.D * proj.PiNabla;
  A += (kappa_sup + gamma_sup * ctx.geom.area) * sigma * (slack.transpose() * slack);
  return 0.5 * (A + A.transpose());
}

Eigen::MatrixXd local_obs_mass(const ProjectorSet& proj) {
  Eigen::MatrixXd M = proj.Pi0k.transpose() * proj.H * proj.Pi0k;
  return 0.5 * (M + M.transpose());
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> local_loads(const CellContext& ctx,
                                                        const ProjectorSet& proj,
                                                        const ScalarFn& f, const ScalarFn& y_d) {
  QuadratureRule rule = cell_rule(ctx.geom, 2 * ctx.k + 6);
  Eigen::MatrixXd vals = eval_basis(ctx.basis, rule.points);
  const int nk = MonomialBasis::dim(ctx.k);
  Eigen::VectorXd mf = Eigen::VectorXd::Zero(nk), md = Eigen::VectorXd::Zero(nk);
  for (int q = 0; q < rule.size(); ++q) {
    const Point x = rule.points.row(q).transpose();
    const double wf = rule.weights(q) * (f ? f(x) : 0.0);
    const double wd = rule.weights(q) * (y_d ? y_d(x) : 0.0);
    for (int i = 0; i < nk; ++i) {
      mf(i) += wf * vals(q, i);
      md(i) += wd * vals(q, i);
    }
  }
  return {proj.Pi0k.transpose() * mf, proj.Pi0k.transpose() * md};
}

namespace {

// Monomial means c_i = (1/|E|) int_E m_i for i < dim; the zero-mean basis
// used by the curl projectors is mhat_i = m_i - c_i.
Eigen::VectorXd monomial_means(const CellContext& ctx, int dim) {
  int deg = 0;
  while (MonomialBasis::dim(deg) < dim) ++deg;
  MonomialBasis b{ctx.basis.center, ctx.basis.h, deg};
  QuadratureRule rule = cell_rule(ctx.geom, deg);
  Eigen::MatrixXd vals = eval_basis(b, rule.points);
  Eigen::VectorXd c(dim);
  for (int i = 0; i < dim; ++i)
    c(i) = (rule.weights.array() * vals.col(i).array()).sum() / ctx.geom.area;
  return c;
}

} // namespace

int select_ell(const CellContext& ctx, double tol) {
  const int n_edges = ctx.n_vertex_dofs();
  const int ell_max = 2 + (n_edges + 1) / 2;
  for (int ell = std::max(ctx.k - 1, 0); ell <= ell_max; ++ell) {
    const int dim = MonomialBasis::dim(ell + 1);
    if (dim - 1 < n_edges) continue;
    MonomialBasis b{ctx.basis.center, ctx.basis.h, ell + 1};
    Eigen::VectorXd means = monomial_means(ctx, dim);
    // Edge means of the zero-mean monomials.
    Eigen::MatrixXd M(n_edges, dim - 1);
    for (int e = 0; e < n_edges; ++e) {
      const Point& pa = ctx.verts[e];
      const Point& pb = ctx.verts[(e + 1) % n_edges];
      QuadratureRule er = edge_rule(pa, pb, ell + 1);
      Eigen::MatrixXd vals = eval_basis(b, er.points);
      const double len = (pb - pa).norm();
      for (int i = 1; i < dim; ++i)
        M(e, i - 1) = (er.weights.array() * vals.col(i).array()).sum() / len - means(i);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M.transpose());
    qr.setThreshold(tol);
    if (qr.rank() == n_edges) return ell;
  }
  throw std::runtime_error("select_ell: no degree up to " + std::to_string(ell_max) +
                           " achieves full edge-mean rank on cell " + std::to_string(ctx.cell));
}

StabFreeProjector build_stabfree_projectors(const CellContext& ctx, const ProjectorSet& proj,
                                            int ell) {
  if (ctx.k != 1)
    throw std::runtime_error("build_stabfree_projectors: the scheme is available only for k=1");
  StabFreeProjector sf;
  sf.ell = ell;
  const int dim = MonomialBasis::dim(ell + 1);
  const int nv = ctx.n_vertex_dofs();
  MonomialBasis b{ctx.basis.center, ctx.basis.h, ell + 1};

  // Gram of the curls of the zero-mean monomials; curls of constant shifts
  // vanish, so this is the H1 Gram of m_1..m_{dim-1}.
  QuadratureRule rule = cell_rule(ctx.geom, 2 * (ell + 1));
  GradValues g = eval_grad(b, rule.points);
  Eigen::MatrixXd G(dim - 1, dim - 1);
  for (int i = 1; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      G(i - 1, j - 1) = (rule.weights.array() *
                         (g.x.col(i).array() * g.x.col(j).array() +
                          g.y.col(i).array() * g.y.col(j).array()))
                            .sum();
      G(j - 1, i - 1) = G(i - 1, j - 1);
    }

  // Right-hand side by parts: div curl p = 0, so (grad u, curl p)_E reduces
  // to the boundary integral of u (curl p . n), known from the traces.
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(dim - 1, ctx.n_dof);
  const int n1d = (ell + 1 + ctx.k) / 2 + 1;
  auto [gq, wq] = gauss_legendre(n1d);
  Eigen::VectorXd t(n1d);
  for (int q = 0; q < n1d; ++q) t(q) = 0.5 * (gq(q) + 1.0);
  Eigen::MatrixXd L = trace_basis(ctx.k, t);
  for (int e = 0; e < nv; ++e) {
    const Point& pa = ctx.verts[e];
    const Point& pb = ctx.verts[(e + 1) % nv];
    const double len = (pb - pa).norm();
    const Point tang = (pb - pa) / len;
    const Point normal(tang.y(), -tang.x());
    Eigen::Matrix<double, Eigen::Dynamic, 2> pts(n1d, 2);
    for (int q = 0; q < n1d; ++q) pts.row(q) = (pa + t(q) * (pb - pa)).transpose();
    GradValues curls = eval_curl(b, pts);
    for (int i = 1; i < dim; ++i) {
      Eigen::VectorXd cn = curls.x.col(i) * normal.x() + curls.y.col(i) * normal.y();
      for (int a = 0; a <= ctx.k; ++a) {
        const int ldof = ctx.edge_nodes[e][a];
        for (int q = 0; q < n1d; ++q)
          B(i - 1, ldof) += 0.5 * wq(q) * len * cn(q) * L(q, a);
      }
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G);
  qr.setThreshold(1e-12);
  if (qr.rank() < dim - 1)
    throw std::runtime_error("build_stabfree_projectors: curl Gram rank-deficient at ell = " +
                             std::to_string(ell) + " on cell " + std::to_string(ctx.cell));
  sf.Pi_hat = qr.solve(B);

  // Pi_curl phi_j = |E|^{-1} int_E phi_j + sum_i pi_ij mhat_i, written in
  // the plain monomial basis of P_{ell+1}. For k=1 the mean of phi_j equals
  // the mean of its PiNabla projection by the enhancement constraint.
  Eigen::VectorXd mean_k = monomial_means(ctx, MonomialBasis::dim(ctx.k));
  Eigen::RowVectorXd phi_means = mean_k.transpose() * proj.PiNabla;
  Eigen::VectorXd means = monomial_means(ctx, dim);
  sf.Pi_curl = Eigen::MatrixXd::Zero(dim, ctx.n_dof);
  sf.Pi_curl.bottomRows(dim - 1) = sf.Pi_hat;
  sf.Pi_curl.row(0) = phi_means - means.tail(dim - 1).transpose() * sf.Pi_hat;
  return sf;
}

Eigen::MatrixXd local_stiffness_stabfree(const CellContext& ctx, const StabFreeProjector& sf,
                                         const ScalarFn& kappa, const ScalarFn& gamma) {
  const int dim = MonomialBasis::dim(sf.ell + 1);
  MonomialBasis b{ctx.basis.center, ctx.basis.h, sf.ell + 1};
  QuadratureRule rule = cell_rule(ctx.geom, 2 * (sf.ell + 1) + 2);

  // (K curl mhat_i, curl mhat_j) = (K grad m_i, grad m_j): the rotation
  // drops out pointwise, also under a variable coefficient.
  GradValues g = eval_grad(b, rule.points);
  Eigen::VectorXd kv(rule.size()), gv(rule.size());
  for (int q = 0; q < rule.size(); ++q) {
    const Point x = rule.points.row(q).transpose();
    kv(q) = kappa(x);
    if (kv(q) <= 0.0)
      throw std::runtime_error("local_stiffness_stabfree: non-positive kappa sample on cell " +
                               std::to_string(ctx.cell));
    gv(q) = gamma(x);
  }
  Eigen::MatrixXd Gk(dim - 1, dim - 1);
  for (int i = 1; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      Gk(i - 1, j - 1) = (rule.weights.array() * kv.array() *
                          (g.x.col(i).array() * g.x.col(j).array() +
                           g.y.col(i).array() * g.y.col(j).array()))
                             .sum();
      Gk(j - 1, i - 1) = Gk(i - 1, j - 1);
    }
  Eigen::MatrixXd vals = eval_basis(b, rule.points);
  Eigen::MatrixXd Gm(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      Gm(i, j) = (rule.weights.array() * gv.array() * vals.col(i).array() * vals.col(j).array()).sum();
      Gm(j, i) = Gm(i, j);
    }
  Eigen::MatrixXd A =
      sf.Pi_hat.transpose() * Gk * sf.Pi_hat + sf.Pi_curl.transpose() * Gm * sf.Pi_curl;
  return 0.5 * (A + A.transpose());
}

} // namespace vemocp
