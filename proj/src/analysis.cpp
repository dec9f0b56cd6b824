#include "vemocp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace vemocp {

namespace {

Eigen::VectorXd local_values(const Discretization& d, int c, const Eigen::VectorXd& dofs) {
  const auto& cd = d.layout.cell_dofs[c];
  Eigen::VectorXd loc(cd.size());
  for (size_t i = 0; i < cd.size(); ++i) loc(i) = dofs(cd[i]);
  return loc;
}

} // namespace

double l2_error_state(const Discretization& d, const Eigen::VectorXd& dofs, const ScalarFn& exact) {
  double err2 = 0.0;
  for (int c = 0; c < d.mesh->n_cells(); ++c) {
    const CellOps& ops = d.cells[c];
    Eigen::VectorXd coeff = ops.proj.Pi0k * local_values(d, c, dofs);
    QuadratureRule rule = cell_rule(ops.ctx.geom, 2 * d.cfg.k + 6);
    Eigen::MatrixXd vals = eval_basis(ops.ctx.basis, rule.points);
    for (int q = 0; q < rule.size(); ++q) {
      const double diff = vals.row(q).dot(coeff) - exact(rule.points.row(q).transpose());
      err2 += rule.weights(q) * diff * diff;
    }
  }
  return std::sqrt(err2);
}

double energy_error(const Discretization& d, const Eigen::VectorXd& dofs, const ScalarFn& exact,
                    const VecFn& grad_exact) {
  double err2 = 0.0;
  for (int c = 0; c < d.mesh->n_cells(); ++c) {
    const CellOps& ops = d.cells[c];
    Eigen::VectorXd loc = local_values(d, c, dofs);
    Eigen::VectorXd nabla_coeff = ops.proj.PiNabla * loc;
    Eigen::VectorXd l2_coeff = ops.proj.Pi0k * loc;
    QuadratureRule rule = cell_rule(ops.ctx.geom, 2 * d.cfg.k + 6);
    Eigen::MatrixXd vals = eval_basis(ops.ctx.basis, rule.points);
    GradValues grads = eval_grad(ops.ctx.basis, rule.points);
    for (int q = 0; q < rule.size(); ++q) {
      const Point x = rule.points.row(q).transpose();
      const Eigen::Vector2d ge = grad_exact(x);
      const double gx = grads.x.row(q).dot(nabla_coeff) - ge.x();
      const double gy = grads.y.row(q).dot(nabla_coeff) - ge.y();
      const double dv = vals.row(q).dot(l2_coeff) - exact(x);
      err2 += rule.weights(q) * (d.cfg.kappa(x) * (gx * gx + gy * gy) + d.cfg.gamma(x) * dv * dv);
    }
  }
  return std::sqrt(err2);
}

double control_error(const Discretization& d, const Eigen::VectorXd& u, const ScalarFn& exact) {
  double err2 = 0.0;
  const ControlSpace& cs = d.control;
  const int n1d = cs.k_u + 4;
  auto [g, w] = gauss_legendre(n1d);
  Eigen::VectorXd t(n1d);
  for (int q = 0; q < n1d; ++q) t(q) = 0.5 * (g(q) + 1.0);
  const Eigen::MatrixXd L = trace_basis(cs.k_u, t);
  for (size_t ie = 0; ie < cs.edges.size(); ++ie) {
    const Edge& ed = d.mesh->edge(cs.edges[ie]);
    const Point a = d.mesh->vertex(ed.v0), b = d.mesh->vertex(ed.v1);
    const double len = (b - a).norm();
    for (int q = 0; q < n1d; ++q) {
      double uh = 0.0;
      for (int m = 0; m <= cs.k_u; ++m) uh += L(q, m) * u(cs.edge_dofs[ie][m]);
      const double diff = uh - exact(a + t(q) * (b - a));
      err2 += 0.5 * w(q) * len * diff * diff;
    }
  }
  return std::sqrt(err2);
}

double fit_rate(const std::vector<double>& h, const std::vector<double>& err, double floor,
                int* excluded) {
  if (h.size() != err.size() || h.size() < 2)
    throw std::runtime_error("fit_rate: need at least two (h, err) rows");
  std::vector<double> lx, ly;
  int dropped = 0;
  for (size_t i = 0; i < h.size(); ++i) {
    if (!(err[i] > floor)) {
      ++dropped; // machine-precision rows are excluded from the fit
      continue;
    }
    lx.push_back(std::log(h[i]));
    ly.push_back(std::log(err[i]));
  }
  if (excluded) *excluded = dropped;
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= lx.size();
  my /= ly.size();
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  return num / den;
}

namespace {

const std::vector<std::pair<std::string, double RunRecord::*>>& error_columns() {
  static const std::vector<std::pair<std::string, double RunRecord::*>> cols = {
      {"errY_L2", &RunRecord::errY_L2}, {"errY_en", &RunRecord::errY_en},
      {"errP_L2", &RunRecord::errP_L2}, {"errP_en", &RunRecord::errP_en},
      {"errU_L2", &RunRecord::errU_L2}};
  return cols;
}

} // namespace

void fit_rates(ErrorReport& report, double floor) {
  if (report.rows.size() < 2) return;
  std::vector<double> h;
  for (const auto& r : report.rows) h.push_back(r.h);
  for (const auto& [name, member] : error_columns()) {
    std::vector<double> e;
    for (const auto& r : report.rows) e.push_back(r.*member);
    int excl = 0;
    report.slopes[name] = fit_rate(h, e, floor, &excl);
    if (excl > 0) report.excluded_rows[name] = excl;
  }
}

void write_csv(const ErrorReport& report, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  std::fprintf(f, "h,ndof,errY_L2,errY_en,errP_L2,errP_en,errU_L2,Jh\n");
  for (const auto& r : report.rows)
    std::fprintf(f, "%.12g,%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.h, r.ndof, r.errY_L2,
                 r.errY_en, r.errP_L2, r.errP_en, r.errU_L2, r.Jh);
  std::fclose(f);
}

void write_rates_json(const ErrorReport& report, const std::string& path) {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows)
    j["rows"].push_back({{"h", r.h},
                         {"ndof", r.ndof},
                         {"errY_L2", r.errY_L2},
                         {"errY_en", r.errY_en},
                         {"errP_L2", r.errP_L2},
                         {"errP_en", r.errP_en},
                         {"errU_L2", r.errU_L2},
                         {"Jh", r.Jh}});
  for (const auto& [name, slope] : report.slopes)
    j["slopes"][name] = std::isnan(slope) ? nlohmann::json() : nlohmann::json(slope);
  for (const auto& [name, n] : report.excluded_rows) j["excluded_rows"][name] = n;
  std::ofstream out(path);
  out << j.dump(1) << "\n";
}

ReferenceSolution::ReferenceSolution(std::shared_ptr<const PolyMesh> mesh, Discretization disc,
                                     SolutionTriple sol)
    : mesh_(std::move(mesh)), disc_(std::move(disc)), sol_(std::move(sol)) {
  // Bin cells by bounding box on a grid sized to the cell count.
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (int v = 0; v < mesh_->n_vertices(); ++v) {
    x0 = std::min(x0, mesh_->vertex(v).x());
    y0 = std::min(y0, mesh_->vertex(v).y());
    x1 = std::max(x1, mesh_->vertex(v).x());
    y1 = std::max(y1, mesh_->vertex(v).y());
  }
  const int n = std::max(1, static_cast<int>(std::sqrt(mesh_->n_cells())));
  nx_ = n;
  ny_ = n;
  bx0_ = x0;
  by0_ = y0;
  hx_ = (x1 - x0) / nx_;
  hy_ = (y1 - y0) / ny_;
  bins_.resize(nx_ * ny_);
  for (int c = 0; c < mesh_->n_cells(); ++c) {
    double cx0 = 1e300, cy0 = 1e300, cx1 = -1e300, cy1 = -1e300;
    for (int v : mesh_->cell(c)) {
      cx0 = std::min(cx0, mesh_->vertex(v).x());
      cy0 = std::min(cy0, mesh_->vertex(v).y());
      cx1 = std::max(cx1, mesh_->vertex(v).x());
      cy1 = std::max(cy1, mesh_->vertex(v).y());
    }
    const int i0 = std::max(0, static_cast<int>((cx0 - bx0_) / hx_));
    const int i1 = std::min(nx_ - 1, static_cast<int>((cx1 - bx0_) / hx_));
    const int j0 = std::max(0, static_cast<int>((cy0 - by0_) / hy_));
    const int j1 = std::min(ny_ - 1, static_cast<int>((cy1 - by0_) / hy_));
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) bins_[j * nx_ + i].push_back(c);
  }
}

int ReferenceSolution::locate(const Point& x) const {
  const int i = std::min(nx_ - 1, std::max(0, static_cast<int>((x.x() - bx0_) / hx_)));
  const int j = std::min(ny_ - 1, std::max(0, static_cast<int>((x.y() - by0_) / hy_)));
  for (int c : bins_[j * nx_ + i]) {
    // Point-in-polygon with a small inflation so quadrature points on cell
    // borders are accepted.
    const auto& loop = mesh_->cell(c);
    const int n = static_cast<int>(loop.size());
    bool inside = true;
    const double tol = 1e-12 * disc_.cells[c].ctx.geom.diameter;
    for (int a = 0; a < n && inside; ++a) {
      const Point& pa = mesh_->vertex(loop[a]);
      const Point& pb = mesh_->vertex(loop[(a + 1) % n]);
      const double cr = (pb.x() - pa.x()) * (x.y() - pa.y()) - (pb.y() - pa.y()) * (x.x() - pa.x());
      if (cr < -tol * (pb - pa).norm()) inside = false;
    }
    if (inside) return c;
  }
  throw std::runtime_error("reference point location failed at (" + std::to_string(x.x()) + ", " +
                           std::to_string(x.y()) + ")");
}

double ReferenceSolution::y_value(const Point& x) const {
  const int c = locate(x);
  const CellOps& ops = disc_.cells[c];
  Eigen::VectorXd coeff = ops.proj.Pi0k * local_values(disc_, c, sol_.y);
  Eigen::Matrix<double, 1, 2> pt(x.x(), x.y());
  return eval_basis(ops.ctx.basis, pt).row(0).dot(coeff);
}

double ReferenceSolution::p_value(const Point& x) const {
  const int c = locate(x);
  const CellOps& ops = disc_.cells[c];
  Eigen::VectorXd coeff = ops.proj.Pi0k * local_values(disc_, c, sol_.p);
  Eigen::Matrix<double, 1, 2> pt(x.x(), x.y());
  return eval_basis(ops.ctx.basis, pt).row(0).dot(coeff);
}

Eigen::Vector2d ReferenceSolution::y_gradient(const Point& x) const {
  const int c = locate(x);
  const CellOps& ops = disc_.cells[c];
  Eigen::VectorXd coeff = ops.proj.PiNabla * local_values(disc_, c, sol_.y);
  Eigen::Matrix<double, 1, 2> pt(x.x(), x.y());
  GradValues g = eval_grad(ops.ctx.basis, pt);
  return {g.x.row(0).dot(coeff), g.y.row(0).dot(coeff)};
}

Eigen::Vector2d ReferenceSolution::p_gradient(const Point& x) const {
  const int c = locate(x);
  const CellOps& ops = disc_.cells[c];
  Eigen::VectorXd coeff = ops.proj.PiNabla * local_values(disc_, c, sol_.p);
  Eigen::Matrix<double, 1, 2> pt(x.x(), x.y());
  GradValues g = eval_grad(ops.ctx.basis, pt);
  return {g.x.row(0).dot(coeff), g.y.row(0).dot(coeff)};
}

double ReferenceSolution::u_value(const Point& x) const {
  const ControlSpace& cs = disc_.control;
  const Eigen::VectorXd nodes = trace_nodes(cs.k_u);
  for (size_t ie = 0; ie < cs.edges.size(); ++ie) {
    const Edge& ed = mesh_->edge(cs.edges[ie]);
    const Point a = mesh_->vertex(ed.v0), b = mesh_->vertex(ed.v1);
    const double len2 = (b - a).squaredNorm();
    const double t = (x - a).dot(b - a) / len2;
    if (t < -1e-9 || t > 1.0 + 1e-9) continue;
    const Point foot = a + t * (b - a);
    if ((x - foot).norm() > 1e-9 * std::sqrt(len2)) continue;
    Eigen::VectorXd tt(1);
    tt(0) = std::clamp(t, 0.0, 1.0);
    const Eigen::MatrixXd L = trace_basis(cs.k_u, tt);
    double v = 0.0;
    for (int m = 0; m <= cs.k_u; ++m) v += L(0, m) * sol_.u(cs.edge_dofs[ie][m]);
    return v;
  }
  throw std::runtime_error("reference control location failed at (" + std::to_string(x.x()) +
                           ", " + std::to_string(x.y()) + ")");
}

RunRecord reference_errors(const Discretization& d, const SolutionTriple& sol,
                           const ReferenceSolution& ref) {
  RunRecord r;
  r.h = d.mesh->mesh_size();
  r.ndof = 0;
  double y2 = 0.0, yen2 = 0.0, p2 = 0.0, pen2 = 0.0;
  for (int c = 0; c < d.mesh->n_cells(); ++c) {
    const CellOps& ops = d.cells[c];
    Eigen::VectorXd ly = local_values(d, c, sol.y);
    Eigen::VectorXd lp = local_values(d, c, sol.p);
    Eigen::VectorXd cy0 = ops.proj.Pi0k * ly, cyN = ops.proj.PiNabla * ly;
    Eigen::VectorXd cp0 = ops.proj.Pi0k * lp, cpN = ops.proj.PiNabla * lp;
    QuadratureRule rule = cell_rule(ops.ctx.geom, 2 * d.cfg.k + 2);
    Eigen::MatrixXd vals = eval_basis(ops.ctx.basis, rule.points);
    GradValues grads = eval_grad(ops.ctx.basis, rule.points);
    for (int q = 0; q < rule.size(); ++q) {
      const Point x = rule.points.row(q).transpose();
      const double kap = d.cfg.kappa(x), gam = d.cfg.gamma(x);
      const double dy = vals.row(q).dot(cy0) - ref.y_value(x);
      const double dp = vals.row(q).dot(cp0) - ref.p_value(x);
      const Eigen::Vector2d gyr = ref.y_gradient(x), gpr = ref.p_gradient(x);
      const double gyx = grads.x.row(q).dot(cyN) - gyr.x();
      const double gyy = grads.y.row(q).dot(cyN) - gyr.y();
      const double gpx = grads.x.row(q).dot(cpN) - gpr.x();
      const double gpy = grads.y.row(q).dot(cpN) - gpr.y();
      y2 += rule.weights(q) * dy * dy;
      p2 += rule.weights(q) * dp * dp;
      yen2 += rule.weights(q) * (kap * (gyx * gyx + gyy * gyy) + gam * dy * dy);
      pen2 += rule.weights(q) * (kap * (gpx * gpx + gpy * gpy) + gam * dp * dp);
    }
  }
  r.errY_L2 = std::sqrt(y2);
  r.errP_L2 = std::sqrt(p2);
  r.errY_en = std::sqrt(yen2);
  r.errP_en = std::sqrt(pen2);
  r.errU_L2 = control_error(d, sol.u, [&ref](const Point& x) { return ref.u_value(x); });
  return r;
}

} // namespace vemocp
