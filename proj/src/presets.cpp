#include "vemocp/presets.hpp"

#include <cmath>
#include <stdexcept>

namespace vemocp::presets {

namespace {
constexpr double kPi = M_PI;
constexpr double kTol = 1e-9;
}

Rect test1_domain() { return Rect{0.0, 0.0, 1.0, 1.0}; }

TagRule test1_tags() {
  return [](const Point& mid) {
    return mid.x() < kTol ? BoundaryTag::Control : BoundaryTag::Dirichlet;
  };
}

OcpConfig test1(int k, int k_u, double sigma, Scheme scheme) {
  OcpConfig c;
  c.k = k;
  c.k_u = k_u;
  c.sigma = sigma;
  c.scheme = scheme;
  c.alpha = 1.0;
  c.kappa = [](const Point&) { return 1.0; };
  c.gamma = [](const Point&) { return 1.0; };
  c.f = [](const Point& x) {
    return (1.0 - x.x()) * std::sin(kPi * x.y()) * (1.0 + kPi * kPi);
  };
  c.y_d = [](const Point& x) {
    return std::sin(kPi * x.y()) *
           ((1.0 - x.x()) + (5.0 * kPi * kPi / 4.0 + 1.0) * std::cos(kPi * x.x() / 2.0));
  };
  c.g = [](const Point&) { return 0.0; };
  OcpConfig::Exact ex;
  ex.y = [](const Point& x) { return (1.0 - x.x()) * std::sin(kPi * x.y()); };
  ex.u = [](const Point& x) { return std::sin(kPi * x.y()); };
  ex.p = [](const Point& x) { return std::sin(kPi * x.y()) * std::cos(kPi * x.x() / 2.0); };
  ex.grad_y = [](const Point& x) {
    return Eigen::Vector2d(-std::sin(kPi * x.y()), (1.0 - x.x()) * kPi * std::cos(kPi * x.y()));
  };
  ex.grad_p = [](const Point& x) {
    return Eigen::Vector2d(-kPi / 2.0 * std::sin(kPi * x.y()) * std::sin(kPi * x.x() / 2.0),
                           kPi * std::cos(kPi * x.y()) * std::cos(kPi * x.x() / 2.0));
  };
  c.exact = std::move(ex);
  return c;
}

Rect test2_domain() { return Rect{0.0, 0.0, 2.0, 1.0}; }

TagRule test2_tags() {
  return [](const Point& mid) {
    if (mid.x() > 2.0 - kTol) return BoundaryTag::Neumann;
    if (mid.x() > 1.0 && (mid.y() < kTol || mid.y() > 1.0 - kTol)) return BoundaryTag::Control;
    return BoundaryTag::Dirichlet;
  };
}

ObsRule test2_obs() {
  // Omega_obs = (1,2)x(0.8,1) union (1,2)x(0,0.2); 0 on its boundary.
  return [](const Point& p) {
    auto classify = [](double v, double lo, double hi) {
      if (v > lo + kTol && v < hi - kTol) return 1;
      if (v < lo - kTol || v > hi + kTol) return -1;
      return 0;
    };
    const int cx = classify(p.x(), 1.0, 2.0);
    const int top = classify(p.y(), 0.8, 1.0);
    const int bot = classify(p.y(), 0.0, 0.2);
    if (cx < 0 || (top < 0 && bot < 0)) return -1;
    const int cy = std::max(top, bot);
    return std::min(cx, cy);
  };
}

OcpConfig test2(int k, int k_u, double sigma, Scheme scheme) {
  OcpConfig c;
  c.k = k;
  c.k_u = k_u;
  c.sigma = sigma;
  c.scheme = scheme;
  c.alpha = 0.07;
  c.kappa = [](const Point&) { return 1.0 / 12.0; };
  c.gamma = [](const Point&) { return 1.0; };
  c.f = [](const Point&) { return 0.0; };
  c.y_d = [](const Point&) { return 2.5; };
  c.g = [](const Point&) { return 1.0; };
  return c;
}

OcpConfig by_name(const std::string& name, int k, int k_u, double sigma, Scheme scheme) {
  if (name == "test1") return test1(k, k_u, sigma, scheme);
  if (name == "test2") return test2(k, k_u, sigma, scheme);
  throw std::runtime_error("unknown preset '" + name + "'");
}

TagRule tags_by_name(const std::string& name) {
  if (name == "test1") return test1_tags();
  if (name == "test2") return test2_tags();
  throw std::runtime_error("unknown preset '" + name + "'");
}

} // namespace vemocp::presets
