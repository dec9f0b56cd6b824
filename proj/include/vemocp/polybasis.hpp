// Scaled monomial bases on cells, their derivatives and curls, and Gauss
// quadrature on polygons (composite rules over the centroid fan) and edges.

#ifndef VEMOCP_POLYBASIS_HPP
#define VEMOCP_POLYBASIS_HPP

#include <utility>

#include <Eigen/Dense>

#include "vemocp/mesh.hpp"

namespace vemocp {

/// Scaled monomials m_a(x) = ((x - x_E)/h_E)^a in graded lexicographic
/// order: 1, x, y, x^2, xy, y^2, ...
struct MonomialBasis {
  Point center;
  double h;
  int degree;

  static int dim(int k) { return (k + 1) * (k + 2) / 2; }
  int size() const { return dim(degree); }
  /// Exponents (ax, ay) of the i-th monomial.
  static std::pair<int, int> exponents(int i);
  static int index(int ax, int ay) { return (ax + ay) * (ax + ay + 1) / 2 + ay; }
};

struct GradValues {
  Eigen::MatrixXd x, y; // one row per point, one column per monomial
};

/// Values m_a(pt): one row per point, one column per monomial.
Eigen::MatrixXd eval_basis(const MonomialBasis& basis, const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts);
/// Gradients of the monomials at the given points.
GradValues eval_grad(const MonomialBasis& basis, const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts);
/// curl m = (dm/dy, -dm/dx) at the given points.
GradValues eval_curl(const MonomialBasis& basis, const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts);

/// Coefficients of the Laplacian of monomial i in the (smaller) monomial
/// basis; vector of length dim(degree-2) (empty for degree < 2 terms).
Eigen::VectorXd laplacian_coeffs(const MonomialBasis& basis, int i, int target_dim);
/// Coefficients of d/dx resp. d/dy of monomial i in the smaller basis.
Eigen::VectorXd deriv_coeffs(const MonomialBasis& basis, int i, int component, int target_dim);

struct QuadratureRule {
  Eigen::Matrix<double, Eigen::Dynamic, 2> points;
  Eigen::VectorXd weights;
  int exactness = 0;
  int size() const { return static_cast<int>(weights.size()); }
};

/// Gauss-Legendre nodes and weights on [-1, 1], exact to degree 2n-1.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n);
/// Gauss-Lobatto nodes on [-1, 1] (n >= 2, endpoints included).
Eigen::VectorXd gauss_lobatto(int n);

/// Composite Gauss rule over the centroid fan of a cell, exact for
/// polynomials up to the requested degree. Throws on inverted fan triangles.
QuadratureRule cell_rule(const CellGeometry& geom, int exactness);
/// Gauss-Legendre rule mapped to the segment [a, b].
QuadratureRule edge_rule(const Point& a, const Point& b, int exactness);

} // namespace vemocp

#endif
