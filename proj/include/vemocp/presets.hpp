// Built-in problem presets used by the experiment drivers:
//   test1 — unit square, distributed observation, control on the left side,
//           manufactured solutions y = (1-x1) sin(pi x2), u = sin(pi x2),
//           p = sin(pi x2) cos(pi x1 / 2), kappa = gamma = alpha = 1.
//   test2 — (0,2)x(0,1), observation on two strips near the top and bottom
//           of the right half, control on the adjacent boundary pieces,
//           homogeneous Neumann on the right side, g = 1 elsewhere;
//           alpha = 0.07, kappa = 1/12, gamma = 1, f = 0, y_d = 2.5.

#ifndef VEMOCP_PRESETS_HPP
#define VEMOCP_PRESETS_HPP

#include "vemocp/ocp.hpp"

namespace vemocp::presets {

Rect test1_domain();
TagRule test1_tags();
OcpConfig test1(int k, int k_u = 0, double sigma = 1.0, Scheme scheme = Scheme::Stabilized);

Rect test2_domain();
TagRule test2_tags();
ObsRule test2_obs();
OcpConfig test2(int k, int k_u = 0, double sigma = 1.0, Scheme scheme = Scheme::Stabilized);

/// Preset lookup by name ("test1" or "test2"); throws on unknown names.
OcpConfig by_name(const std::string& name, int k, int k_u, double sigma, Scheme scheme);
TagRule tags_by_name(const std::string& name);

} // namespace vemocp::presets

#endif
