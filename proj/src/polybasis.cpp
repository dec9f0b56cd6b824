#include "vemocp/polybasis.hpp"

#include <cmath>
#include <stdexcept>

namespace vemocp {

std::pair<int, int> MonomialBasis::exponents(int i) {
  int d = 0;
  while ((d + 1) * (d + 2) / 2 <= i) ++d;
  const int j = i - d * (d + 1) / 2;
  return {d - j, j};
}

Eigen::MatrixXd eval_basis(const MonomialBasis& basis, const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) {
  const int np = static_cast<int>(pts.rows());
  const int nb = basis.size();
  Eigen::MatrixXd out(np, nb);
  for (int p = 0; p < np; ++p) {
    const double xi = (pts(p, 0) - basis.center.x()) / basis.h;
    const double eta = (pts(p, 1) - basis.center.y()) / basis.h;
    for (int i = 0; i < nb; ++i) {
      auto [ax, ay] = MonomialBasis::exponents(i);
      out(p, i) = std::pow(xi, ax) * std::pow(eta, ay);
    }
  }
  return out;
}

GradValues eval_grad(const MonomialBasis& basis, const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) {
  const int np = static_cast<int>(pts.rows());
  const int nb = basis.size();
  GradValues g{Eigen::MatrixXd::Zero(np, nb), Eigen::MatrixXd::Zero(np, nb)};
  for (int p = 0; p < np; ++p) {
    const double xi = (pts(p, 0) - basis.center.x()) / basis.h;
    const double eta = (pts(p, 1) - basis.center.y()) / basis.h;
    for (int i = 0; i < nb; ++i) {
      auto [ax, ay] = MonomialBasis::exponents(i);
      if (ax > 0) g.x(p, i) = ax / basis.h * std::pow(xi, ax - 1) * std::pow(eta, ay);
      if (ay > 0) g.y(p, i) = ay / basis.h * std::pow(xi, ax) * std::pow(eta, ay - 1);
    }
  }
  return g;
}

GradValues eval_curl(const MonomialBasis& basis, const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) {
  GradValues g = eval_grad(basis, pts);
  return {g.y, -g.x};
}

Eigen::VectorXd laplacian_coeffs(const MonomialBasis& basis, int i, int target_dim) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(target_dim);
  auto [ax, ay] = MonomialBasis::exponents(i);
  const double s = 1.0 / (basis.h * basis.h);
  if (ax >= 2) c(MonomialBasis::index(ax - 2, ay)) += s * ax * (ax - 1);
  if (ay >= 2) c(MonomialBasis::index(ax, ay - 2)) += s * ay * (ay - 1);
  return c;
}

Eigen::VectorXd deriv_coeffs(const MonomialBasis& basis, int i, int component, int target_dim) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(target_dim);
  auto [ax, ay] = MonomialBasis::exponents(i);
  if (component == 0 && ax >= 1) c(MonomialBasis::index(ax - 1, ay)) = ax / basis.h;
  if (component == 1 && ay >= 1) c(MonomialBasis::index(ax, ay - 1)) = ay / basis.h;
  return c;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n) {
  if (n < 1) throw std::runtime_error("gauss_legendre: n must be >= 1");
  Eigen::VectorXd x(n), w(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton from the Chebyshev estimate of the i-th root of P_n.
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x(i) = -z;
    x(n - 1 - i) = z;
    w(i) = 2.0 / ((1.0 - z * z) * pp * pp);
    w(n - 1 - i) = w(i);
  }
  return {x, w};
}

Eigen::VectorXd gauss_lobatto(int n) {
  if (n < 2) throw std::runtime_error("gauss_lobatto: n must be >= 2");
  Eigen::VectorXd x(n);
  x(0) = -1.0;
  x(n - 1) = 1.0;
  const int nn = n - 1; // interior nodes are the roots of P'_{n-1}
  for (int i = 1; i < n - 1; ++i) {
    double z = std::cos(M_PI * i / nn); // Chebyshev-Lobatto estimate
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < nn; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      const double dp = nn * (z * p0 - p1) / (z * z - 1.0);
      const double d2p = (2.0 * z * dp - nn * (nn + 1.0) * p0) / (1.0 - z * z);
      const double dz = dp / d2p;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x(n - 1 - i) = z;
  }
  return x;
}

QuadratureRule cell_rule(const CellGeometry& geom, int exactness) {
  if (exactness < 0) throw std::runtime_error("cell_rule: exactness must be >= 0");
  // Collapsed-square Gauss rule per fan triangle: with x = u, y = v(1-u) on
  // the reference triangle the integrand of degree d has degree d+1 in u.
  const int nu = (exactness + 3) / 2;
  const int nv = (exactness + 2) / 2;
  auto [gu, wu] = gauss_legendre(nu);
  auto [gv, wv] = gauss_legendre(nv);
  const int nt = static_cast<int>(geom.fan.size());
  QuadratureRule rule;
  rule.exactness = exactness;
  rule.points.resize(nt * nu * nv, 2);
  rule.weights.resize(nt * nu * nv);
  int q = 0;
  for (const auto& tri : geom.fan) {
    const Point& a = tri[0];
    const Point& b = tri[1];
    const Point& c = tri[2];
    const double jac = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    if (jac <= 0.0)
      throw std::runtime_error("cell_rule: inverted fan triangle (cell not star-shaped w.r.t. centroid)");
    for (int iu = 0; iu < nu; ++iu)
      for (int iv = 0; iv < nv; ++iv) {
        const double u = 0.5 * (gu(iu) + 1.0);
        const double v = 0.5 * (gv(iv) + 1.0);
        const double xr = u, yr = v * (1.0 - u);
        rule.points.row(q) = (a + xr * (b - a) + yr * (c - a)).transpose();
        rule.weights(q) = 0.25 * wu(iu) * wv(iv) * (1.0 - u) * jac;
        ++q;
      }
  }
  return rule;
}

QuadratureRule edge_rule(const Point& a, const Point& b, int exactness) {
  const double len = (b - a).norm();
  if (len <= 0.0) throw std::runtime_error("edge_rule: zero-length edge");
  const int n = exactness / 2 + 1;
  auto [g, w] = gauss_legendre(n);
  QuadratureRule rule;
  rule.exactness = exactness;
  rule.points.resize(n, 2);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double t = 0.5 * (g(i) + 1.0);
    rule.points.row(i) = (a + t * (b - a)).transpose();
    rule.weights(i) = 0.5 * w(i) * len;
  }
  return rule;
}

} // namespace vemocp
