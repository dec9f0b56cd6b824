#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Cholesky>

#include "vemocp/polybasis.hpp"

using namespace vemocp;

namespace {

PolyMesh unit_square() {
  return generate_cartesian(1, 1, Rect{0, 0, 1, 1},
                            [](const Point&) { return BoundaryTag::Dirichlet; });
}

// Independent monomial-integration oracle over a polygon: by the divergence
// theorem, int_P x^a y^b dA = 1/(a+1) * sum_e int_e x^{a+1} y^b n_x ds, with
// the edge integrals done by 1D Gauss of sufficient order.
double monomial_integral_oracle(const std::vector<Point>& loop, int a, int b) {
  double total = 0.0;
  const int n = static_cast<int>(loop.size());
  auto [g, w] = gauss_legendre((a + b + 3) / 2 + 1);
  for (int i = 0; i < n; ++i) {
    const Point& p = loop[i];
    const Point& q = loop[(i + 1) % n];
    const double len = (q - p).norm();
    const Point t = (q - p) / len;
    const double nx = t.y();
    for (int k = 0; k < g.size(); ++k) {
      const Point x = p + 0.5 * (g(k) + 1.0) * (q - p);
      total += 0.5 * w(k) * len * std::pow(x.x(), a + 1) * std::pow(x.y(), b) * nx;
    }
  }
  return total / (a + 1);
}

} // namespace

TEST_CASE("monomial ordering and evaluation") {
  MonomialBasis b{Point(0, 0), 1.0, 2};
  CHECK(b.size() == 6);
  CHECK(MonomialBasis::exponents(0) == std::pair<int, int>{0, 0});
  CHECK(MonomialBasis::exponents(1) == std::pair<int, int>{1, 0});
  CHECK(MonomialBasis::exponents(2) == std::pair<int, int>{0, 1});
  CHECK(MonomialBasis::exponents(3) == std::pair<int, int>{2, 0});
  CHECK(MonomialBasis::exponents(4) == std::pair<int, int>{1, 1});
  CHECK(MonomialBasis::exponents(5) == std::pair<int, int>{0, 2});

  Eigen::Matrix<double, 1, 2> pt(0.3, 0.4);
  MonomialBasis b1{Point(0, 0), 1.0, 1};
  Eigen::MatrixXd v = eval_basis(b1, pt);
  CHECK(v(0, 0) == doctest::Approx(1.0));
  CHECK(v(0, 1) == doctest::Approx(0.3));
  CHECK(v(0, 2) == doctest::Approx(0.4));

  Eigen::Matrix<double, 1, 2> ones(1.0, 1.0);
  Eigen::MatrixXd v2 = eval_basis(b, ones);
  for (int i = 0; i < 6; ++i) CHECK(v2(0, i) == doctest::Approx(1.0));

  Eigen::Matrix<double, 1, 2> center(0.0, 0.0);
  Eigen::MatrixXd v3 = eval_basis(b, center);
  CHECK(v3(0, 0) == doctest::Approx(1.0));
  for (int i = 1; i < 6; ++i) CHECK(v3(0, i) == doctest::Approx(0.0));
}

TEST_CASE("gradients: closed forms and scaling") {
  const double h = 0.37;
  MonomialBasis b{Point(0.2, -0.1), h, 2};
  Eigen::Matrix<double, 1, 2> pt(0.9, 0.3);
  GradValues g = eval_grad(b, pt);
  CHECK(g.x(0, 0) == doctest::Approx(0.0));
  CHECK(g.y(0, 0) == doctest::Approx(0.0));
  CHECK(g.x(0, 1) == doctest::Approx(1.0 / h));
  CHECK(g.y(0, 1) == doctest::Approx(0.0));
  // ((x1-c1)/h)^2 at x1-c1 = h has d/dx1 = 2/h.
  Eigen::Matrix<double, 1, 2> pt2(0.2 + h, -0.1);
  GradValues g2 = eval_grad(b, pt2);
  CHECK(g2.x(0, 3) == doctest::Approx(2.0 / h));
  CHECK(g2.y(0, 3) == doctest::Approx(0.0));
}

TEST_CASE("eval_grad matches central finite differences") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-0.8, 0.8);
  MonomialBasis b{Point(0.1, 0.4), 0.83, 4};
  const double eps = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const double x = 0.1 + unif(rng) * 0.83, y = 0.4 + unif(rng) * 0.83;
    Eigen::Matrix<double, 4, 2> pts;
    pts << x + eps, y, x - eps, y, x, y + eps, x, y - eps;
    Eigen::MatrixXd v = eval_basis(b, pts);
    Eigen::Matrix<double, 1, 2> pt(x, y);
    GradValues g = eval_grad(b, pt);
    for (int i = 0; i < b.size(); ++i) {
      const double fdx = (v(0, i) - v(1, i)) / (2 * eps);
      const double fdy = (v(2, i) - v(3, i)) / (2 * eps);
      const double scale = std::max(1.0, std::abs(g.x(0, i)) + std::abs(g.y(0, i)));
      CHECK(std::abs(g.x(0, i) - fdx) / scale < 1e-6);
      CHECK(std::abs(g.y(0, i) - fdy) / scale < 1e-6);
    }
  }
}

TEST_CASE("curl: closed forms and divergence-free check") {
  MonomialBasis b{Point(0.5, 0.5), 2.0, 2};
  Eigen::Matrix<double, 1, 2> pt(0.7, 0.9);
  GradValues c = eval_curl(b, pt);
  // curl of m_2 = (x2-c2)/h is (1/h, 0).
  CHECK(c.x(0, 2) == doctest::Approx(1.0 / 2.0));
  CHECK(c.y(0, 2) == doctest::Approx(0.0));
  CHECK(c.x(0, 0) == doctest::Approx(0.0));
  CHECK(c.y(0, 0) == doctest::Approx(0.0));

  // div(curl p) = 0 by central differences for a random quadratic.
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXd coeff(6);
  for (int i = 0; i < 6; ++i) coeff(i) = unif(rng);
  const double eps = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    const double x = 0.5 + unif(rng), y = 0.5 + unif(rng);
    Eigen::Matrix<double, 4, 2> pts;
    pts << x + eps, y, x - eps, y, x, y + eps, x, y - eps;
    GradValues cv = eval_curl(b, pts);
    const double div = ((cv.x * coeff)(0) - (cv.x * coeff)(1)) / (2 * eps) +
                       ((cv.y * coeff)(2) - (cv.y * coeff)(3)) / (2 * eps);
    CHECK(std::abs(div) < 1e-6);
  }
}

TEST_CASE("cell rule: measure and closed-form integrals") {
  PolyMesh sq = unit_square();
  CellGeometry g = cell_geometry(sq, 0);
  for (int ex : {0, 2, 5, 9}) {
    QuadratureRule r = cell_rule(g, ex);
    CHECK(r.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
  }
  QuadratureRule r2 = cell_rule(g, 2);
  double xy = 0.0;
  for (int q = 0; q < r2.size(); ++q) xy += r2.weights(q) * r2.points(q, 0) * r2.points(q, 1);
  CHECK(xy == doctest::Approx(0.25).epsilon(1e-14));

  // Smooth integrand with a generous rule: int sin(pi x2) = 2/pi.
  QuadratureRule r20 = cell_rule(g, 20);
  double s = 0.0;
  for (int q = 0; q < r20.size(); ++q) s += r20.weights(q) * std::sin(M_PI * r20.points(q, 1));
  CHECK(std::abs(s - 2.0 / M_PI) < 1e-10);
}

TEST_CASE("cell rule: exactness against the divergence-theorem oracle") {
  // An irregular star-shaped pentagon.
  std::vector<Point> loop = {{0.0, 0.0}, {1.2, -0.1}, {1.5, 0.9}, {0.6, 1.3}, {-0.2, 0.7}};
  std::vector<std::tuple<int, int, BoundaryTag>> tags;
  for (int i = 0; i < 5; ++i) tags.emplace_back(i, (i + 1) % 5, BoundaryTag::Dirichlet);
  PolyMesh pent(loop, {{0, 1, 2, 3, 4}}, tags, {});
  CellGeometry g = cell_geometry(pent, 0);
  for (int deg = 0; deg <= 10; ++deg) {
    QuadratureRule r = cell_rule(g, deg);
    for (int a = 0; a + 0 <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b) {
        double val = 0.0;
        for (int q = 0; q < r.size(); ++q)
          val += r.weights(q) * std::pow(r.points(q, 0), a) * std::pow(r.points(q, 1), b);
        const double ref = monomial_integral_oracle(loop, a, b);
        CHECK(std::abs(val - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
      }
  }
}

TEST_CASE("edge rule") {
  QuadratureRule r = edge_rule(Point(0, 0), Point(1, 0), 2);
  double v = 0.0;
  for (int q = 0; q < r.size(); ++q) v += r.weights(q) * r.points(q, 0) * r.points(q, 0);
  CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(r.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));

  QuadratureRule r10 = edge_rule(Point(0, 0), Point(1, 0), 19);
  double s = 0.0;
  for (int q = 0; q < r10.size(); ++q) s += r10.weights(q) * std::sin(M_PI * r10.points(q, 0));
  CHECK(std::abs(s - 2.0 / M_PI) < 1e-12);

  QuadratureRule diag = edge_rule(Point(0, 0), Point(3, 4), 1);
  CHECK(diag.weights.sum() == doctest::Approx(5.0));
  CHECK_THROWS(edge_rule(Point(1, 1), Point(1, 1), 2));
}

TEST_CASE("gauss-lobatto nodes") {
  Eigen::VectorXd n3 = gauss_lobatto(3);
  CHECK(n3(1) == doctest::Approx(0.0));
  Eigen::VectorXd n4 = gauss_lobatto(4);
  CHECK(n4(1) == doctest::Approx(-1.0 / std::sqrt(5.0)));
  CHECK(n4(2) == doctest::Approx(1.0 / std::sqrt(5.0)));
  Eigen::VectorXd n5 = gauss_lobatto(5);
  CHECK(n5(1) == doctest::Approx(-std::sqrt(3.0 / 7.0)));
  CHECK(n5(2) == doctest::Approx(0.0));
}

TEST_CASE("monomial Gram matrices are SPD up to k = 6") {
  std::vector<Point> loop = {{0.0, 0.0}, {1.2, -0.1}, {1.5, 0.9}, {0.6, 1.3}, {-0.2, 0.7}};
  std::vector<std::tuple<int, int, BoundaryTag>> tags;
  for (int i = 0; i < 5; ++i) tags.emplace_back(i, (i + 1) % 5, BoundaryTag::Dirichlet);
  PolyMesh pent(loop, {{0, 1, 2, 3, 4}}, tags, {});
  CellGeometry g = cell_geometry(pent, 0);
  for (int k = 1; k <= 6; ++k) {
    MonomialBasis b{g.centroid, g.diameter, k};
    QuadratureRule r = cell_rule(g, 2 * k);
    Eigen::MatrixXd vals = eval_basis(b, r.points);
    Eigen::MatrixXd H(b.size(), b.size());
    for (int i = 0; i < b.size(); ++i)
      for (int j = 0; j < b.size(); ++j)
        H(i, j) = (r.weights.array() * vals.col(i).array() * vals.col(j).array()).sum();
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("scaled monomials are scale invariant") {
  MonomialBasis b1{Point(0.3, 0.7), 0.5, 3};
  const double s = 12.5;
  MonomialBasis b2{s * b1.center, s * b1.h, 3};
  Eigen::Matrix<double, 1, 2> p1(0.41, 0.66);
  Eigen::Matrix<double, 1, 2> p2(s * 0.41, s * 0.66);
  Eigen::MatrixXd v1 = eval_basis(b1, p1);
  Eigen::MatrixXd v2 = eval_basis(b2, p2);
  for (int i = 0; i < b1.size(); ++i) CHECK(v1(0, i) == doctest::Approx(v2(0, i)).epsilon(1e-13));
}
