#include "vemocp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>
#include <stdexcept>

#include <json.hpp>

namespace vemocp {

using json = nlohmann::json;

std::string to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Interior: return "interior";
    case BoundaryTag::Dirichlet: return "dirichlet";
    case BoundaryTag::Neumann: return "neumann";
    case BoundaryTag::Control: return "control";
  }
  return "?";
}

BoundaryTag tag_from_string(const std::string& s) {
  if (s == "dirichlet") return BoundaryTag::Dirichlet;
  if (s == "neumann") return BoundaryTag::Neumann;
  if (s == "control") return BoundaryTag::Control;
  if (s == "interior") return BoundaryTag::Interior;
  throw std::runtime_error("unknown boundary tag '" + s + "'");
}

namespace {

double signed_area(const std::vector<Point>& verts, const std::vector<int>& loop) {
  double a = 0.0;
  const int n = static_cast<int>(loop.size());
  for (int i = 0; i < n; ++i) {
    const Point& p = verts[loop[i]];
    const Point& q = verts[loop[(i + 1) % n]];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

} // namespace

PolyMesh::PolyMesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells,
                   const std::vector<std::tuple<int, int, BoundaryTag>>& boundary_tags,
                   std::vector<bool> obs_flags)
    : vertices_(std::move(vertices)), cells_(std::move(cells)), obs_flags_(std::move(obs_flags)) {
  const int nv = n_vertices();
  if (obs_flags_.empty()) obs_flags_.assign(cells_.size(), false);
  if (static_cast<int>(obs_flags_.size()) != n_cells())
    throw std::runtime_error("obs flag count does not match cell count");

  // Cell sanity: simple loops with at least 3 vertices and positive area.
  for (int c = 0; c < n_cells(); ++c) {
    const auto& loop = cells_[c];
    if (loop.size() < 3)
      throw std::runtime_error("cell " + std::to_string(c) + " has fewer than 3 vertices");
    for (size_t i = 0; i < loop.size(); ++i) {
      if (loop[i] < 0 || loop[i] >= nv)
        throw std::runtime_error("cell " + std::to_string(c) + " references invalid vertex");
      if (loop[i] == loop[(i + 1) % loop.size()])
        throw std::runtime_error("cell " + std::to_string(c) + " repeats a vertex (degenerate edge)");
    }
    if (signed_area(vertices_, loop) <= 0.0)
      throw std::runtime_error("cell " + std::to_string(c) + " has negative area (vertices must be counterclockwise)");
  }

  // Edge table keyed by canonical vertex pair.
  std::map<std::pair<int, int>, int> edge_of;
  cell_edges_.resize(cells_.size());
  for (int c = 0; c < n_cells(); ++c) {
    const auto& loop = cells_[c];
    const int n = static_cast<int>(loop.size());
    cell_edges_[c].resize(n);
    for (int i = 0; i < n; ++i) {
      int a = loop[i], b = loop[(i + 1) % n];
      auto key = std::minmax(a, b);
      auto it = edge_of.find(key);
      if (it == edge_of.end()) {
        Edge e;
        e.v0 = key.first;
        e.v1 = key.second;
        e.cells[0] = c;
        edge_of.emplace(key, static_cast<int>(edges_.size()));
        cell_edges_[c][i] = static_cast<int>(edges_.size());
        edges_.push_back(e);
      } else {
        Edge& e = edges_[it->second];
        if (e.cells[1] >= 0)
          throw std::runtime_error("nonconforming mesh: edge shared by more than two cells");
        if (e.cells[0] == c)
          throw std::runtime_error("cell " + std::to_string(c) + " traverses an edge twice");
        // Conforming orientation: the second cell must traverse v1 -> v0.
        bool first_forward = false;
        {
          const auto& l0 = cells_[e.cells[0]];
          for (size_t j = 0; j < l0.size(); ++j)
            if (l0[j] == e.v0 && l0[(j + 1) % l0.size()] == e.v1) first_forward = true;
        }
        bool this_forward = (a == e.v0);
        if (first_forward == this_forward)
          throw std::runtime_error("nonconforming mesh: inconsistent orientation across an edge");
        e.cells[1] = c;
        cell_edges_[c][i] = it->second;
      }
    }
  }

  // Apply boundary tags; every boundary edge needs exactly one.
  for (const auto& [a, b, tag] : boundary_tags) {
    auto key = std::minmax(a, b);
    auto it = edge_of.find(key);
    if (it == edge_of.end())
      throw std::runtime_error("boundary list references nonexistent edge (" + std::to_string(a) +
                               "," + std::to_string(b) + ")");
    Edge& e = edges_[it->second];
    if (!e.on_boundary())
      throw std::runtime_error("interior edge (" + std::to_string(a) + "," + std::to_string(b) +
                               ") carries a boundary tag");
    if (e.tag != BoundaryTag::Interior)
      throw std::runtime_error("edge (" + std::to_string(a) + "," + std::to_string(b) +
                               ") is tagged twice");
    if (tag == BoundaryTag::Interior)
      throw std::runtime_error("boundary edge cannot be tagged interior");
    e.tag = tag;
  }
  for (const auto& e : edges_)
    if (e.on_boundary() && e.tag == BoundaryTag::Interior)
      throw std::runtime_error("untagged boundary edge (" + std::to_string(e.v0) + "," +
                               std::to_string(e.v1) + ")");

  // Hanging-node guard: no vertex strictly inside a boundary edge.
  for (const auto& e : edges_) {
    if (!e.on_boundary()) continue;
    const Point& a = vertices_[e.v0];
    const Point& b = vertices_[e.v1];
    const double len2 = (b - a).squaredNorm();
    for (int v = 0; v < nv; ++v) {
      if (v == e.v0 || v == e.v1) continue;
      const Point& p = vertices_[v];
      double t = (p - a).dot(b - a) / len2;
      if (t <= 1e-12 || t >= 1.0 - 1e-12) continue;
      Point foot = a + t * (b - a);
      if ((p - foot).norm() < 1e-12 * std::sqrt(len2))
        throw std::runtime_error("nonconforming mesh: vertex " + std::to_string(v) +
                                 " hangs on a boundary edge");
    }
  }
}

int PolyMesh::n_obs_cells() const {
  return static_cast<int>(std::count(obs_flags_.begin(), obs_flags_.end(), true));
}

std::vector<int> PolyMesh::edges_with_tag(BoundaryTag tag) const {
  std::vector<int> out;
  for (int e = 0; e < n_edges(); ++e)
    if (edges_[e].tag == tag) out.push_back(e);
  return out;
}

double PolyMesh::domain_area() const {
  double a = 0.0;
  for (int c = 0; c < n_cells(); ++c) a += signed_area(vertices_, cells_[c]);
  return a;
}

double PolyMesh::mesh_size() const {
  double h = 0.0;
  for (int c = 0; c < n_cells(); ++c) h = std::max(h, cell_geometry(*this, c).diameter);
  return h;
}

CellGeometry cell_geometry(const PolyMesh& mesh, int c) {
  const auto& loop = mesh.cell(c);
  const int n = static_cast<int>(loop.size());
  CellGeometry g;
  g.area = 0.0;
  Point cen = Point::Zero();
  for (int i = 0; i < n; ++i) {
    const Point& p = mesh.vertex(loop[i]);
    const Point& q = mesh.vertex(loop[(i + 1) % n]);
    const double cr = p.x() * q.y() - q.x() * p.y();
    g.area += cr;
    cen += cr * (p + q);
  }
  g.area *= 0.5;
  g.centroid = cen / (6.0 * g.area);
  g.diameter = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      g.diameter = std::max(g.diameter, (mesh.vertex(loop[i]) - mesh.vertex(loop[j])).norm());
  g.edge_lengths.resize(n);
  g.fan.resize(n);
  for (int i = 0; i < n; ++i) {
    const Point& p = mesh.vertex(loop[i]);
    const Point& q = mesh.vertex(loop[(i + 1) % n]);
    g.edge_lengths[i] = (q - p).norm();
    g.fan[i] = {g.centroid, p, q};
  }
  return g;
}

MeshQuality validate(const PolyMesh& mesh, double floor) {
  MeshQuality q;
  q.kappa_star_shape = std::numeric_limits<double>::infinity();
  q.kappa_edge = std::numeric_limits<double>::infinity();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    CellGeometry g = cell_geometry(mesh, c);
    const auto& loop = mesh.cell(c);
    const int n = static_cast<int>(loop.size());
    double rho = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const Point& a = mesh.vertex(loop[i]);
      const Point& b = mesh.vertex(loop[(i + 1) % n]);
      const double len = g.edge_lengths[i];
      if (len <= floor * g.diameter)
        throw std::runtime_error("cell " + std::to_string(c) + ": edge length " +
                                 std::to_string(len) + " below quality floor");
      // Signed distance of the centroid to the edge line; positive iff the
      // centroid lies on the interior side, i.e. in the cell kernel.
      const Point t = (b - a) / len;
      const double d = t.x() * (g.centroid.y() - a.y()) - t.y() * (g.centroid.x() - a.x());
      rho = std::min(rho, d);
    }
    if (rho / g.diameter < q.kappa_star_shape) {
      q.kappa_star_shape = rho / g.diameter;
      q.worst_star_cell = c;
    }
    double emin = *std::min_element(g.edge_lengths.begin(), g.edge_lengths.end());
    if (emin / g.diameter < q.kappa_edge) {
      q.kappa_edge = emin / g.diameter;
      q.worst_edge_cell = c;
    }
    if (rho / g.diameter <= floor)
      throw std::runtime_error("cell " + std::to_string(c) +
                               " fails the star-shape check (centroid kernel estimate " +
                               std::to_string(rho / g.diameter) + ")");
  }
  return q;
}

PolyMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("mesh parse failure in '" + path + "': " + e.what());
  }
  std::vector<Point> verts;
  for (const auto& v : j.at("vertices")) verts.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
  std::vector<std::vector<int>> cells;
  for (const auto& cl : j.at("cells")) cells.push_back(cl.get<std::vector<int>>());
  std::vector<std::tuple<int, int, BoundaryTag>> btags;
  for (const auto& b : j.at("boundary")) {
    const auto& e = b.at("edge");
    btags.emplace_back(e.at(0).get<int>(), e.at(1).get<int>(), tag_from_string(b.at("tag").get<std::string>()));
  }
  std::vector<bool> obs(cells.size(), false);
  if (j.contains("obs_cells"))
    for (int c : j.at("obs_cells").get<std::vector<int>>()) {
      if (c < 0 || c >= static_cast<int>(cells.size()))
        throw std::runtime_error("obs_cells references invalid cell index");
      obs[c] = true;
    }
  return PolyMesh(std::move(verts), std::move(cells), btags, std::move(obs));
}

void save_mesh(const PolyMesh& mesh, const std::string& path) {
  json j;
  j["vertices"] = json::array();
  for (int v = 0; v < mesh.n_vertices(); ++v)
    j["vertices"].push_back({mesh.vertex(v).x(), mesh.vertex(v).y()});
  j["cells"] = json::array();
  for (int c = 0; c < mesh.n_cells(); ++c) j["cells"].push_back(mesh.cell(c));
  j["boundary"] = json::array();
  for (const auto& e : mesh.edges())
    if (e.tag != BoundaryTag::Interior)
      j["boundary"].push_back({{"edge", {e.v0, e.v1}}, {"tag", to_string(e.tag)}});
  json obs = json::array();
  for (int c = 0; c < mesh.n_cells(); ++c)
    if (mesh.obs_flag(c)) obs.push_back(c);
  j["obs_cells"] = obs;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file '" + path + "'");
  out << j.dump(1) << "\n";
}

namespace {

// Flags cells against the observation rule; any cell straddling the region
// boundary is an error (the tessellation must conform to the region).
std::vector<bool> flag_obs_cells(const std::vector<Point>& verts,
                                 const std::vector<std::vector<int>>& cells, const ObsRule& obs) {
  std::vector<bool> flags(cells.size(), true);
  if (!obs) return flags;
  for (size_t c = 0; c < cells.size(); ++c) {
    Point cen = Point::Zero();
    for (int v : cells[c]) cen += verts[v];
    cen /= static_cast<double>(cells[c].size());
    const bool inside = obs(cen) > 0;
    flags[c] = inside;
    for (size_t i = 0; i < cells[c].size(); ++i) {
      const int cls = obs(verts[cells[c][i]]);
      if ((inside && cls < 0) || (!inside && cls > 0))
        throw std::runtime_error("cell " + std::to_string(c) + " straddles the observation region");
      // Edge midpoints catch cells whose vertices all sit on the region boundary.
      Point mid = 0.5 * (verts[cells[c][i]] + verts[cells[c][(i + 1) % cells[c].size()]]);
      const int mcls = obs(mid);
      if ((inside && mcls < 0) || (!inside && mcls > 0))
        throw std::runtime_error("cell " + std::to_string(c) + " straddles the observation region");
    }
  }
  return flags;
}

std::vector<std::tuple<int, int, BoundaryTag>> tag_boundary(
    const std::vector<Point>& verts, const std::vector<std::vector<int>>& cells,
    const TagRule& tag_rule) {
  // Count edge incidences to find the boundary, then tag by midpoint.
  std::map<std::pair<int, int>, int> count;
  for (const auto& loop : cells)
    for (size_t i = 0; i < loop.size(); ++i)
      count[std::minmax(loop[i], loop[(i + 1) % loop.size()])]++;
  std::vector<std::tuple<int, int, BoundaryTag>> tags;
  for (const auto& [key, n] : count) {
    if (n != 1) continue;
    Point mid = 0.5 * (verts[key.first] + verts[key.second]);
    BoundaryTag t = tag_rule ? tag_rule(mid) : BoundaryTag::Dirichlet;
    if (t == BoundaryTag::Interior)
      throw std::runtime_error("tag rule returned 'interior' for a boundary edge");
    tags.emplace_back(key.first, key.second, t);
  }
  return tags;
}

} // namespace

PolyMesh generate_cartesian(int nx, int ny, const Rect& rect, const TagRule& tag_rule,
                            const ObsRule& obs) {
  if (nx < 1 || ny < 1) throw std::runtime_error("generate_cartesian: nx, ny must be >= 1");
  if (rect.width() <= 0.0 || rect.height() <= 0.0)
    throw std::runtime_error("generate_cartesian: degenerate rectangle");
  const double sx = rect.width() / nx, sy = rect.height() / ny;
  std::vector<Point> verts;
  verts.reserve((nx + 1) * (ny + 1));
  for (int jy = 0; jy <= ny; ++jy)
    for (int ix = 0; ix <= nx; ++ix)
      verts.emplace_back(rect.x0 + ix * sx, rect.y0 + jy * sy);
  auto vid = [nx](int ix, int jy) { return jy * (nx + 1) + ix; };
  std::vector<std::vector<int>> cells;
  cells.reserve(nx * ny);
  for (int jy = 0; jy < ny; ++jy)
    for (int ix = 0; ix < nx; ++ix)
      cells.push_back({vid(ix, jy), vid(ix + 1, jy), vid(ix + 1, jy + 1), vid(ix, jy + 1)});
  auto btags = tag_boundary(verts, cells, tag_rule);
  auto flags = flag_obs_cells(verts, cells, obs);
  return PolyMesh(std::move(verts), std::move(cells), btags, std::move(flags));
}

PolyMesh generate_star(int n, const Rect& rect, const TagRule& tag_rule, double indent,
                       const ObsRule& obs) {
  if (n < 2) throw std::runtime_error("generate_star: n must be >= 2");
  if (rect.width() <= 0.0 || rect.height() <= 0.0)
    throw std::runtime_error("generate_star: degenerate rectangle");
  if (indent <= 0.0 || indent >= 0.5)
    throw std::runtime_error("generate_star: indent fraction must lie in (0, 0.5)");
  const double sx = rect.width() / n, sy = rect.height() / n;
  std::vector<Point> verts;
  for (int jy = 0; jy <= n; ++jy)
    for (int ix = 0; ix <= n; ++ix)
      verts.emplace_back(rect.x0 + ix * sx, rect.y0 + jy * sy);
  auto vid = [n](int ix, int jy) { return jy * (n + 1) + ix; };

  // Interior vertical edges get one indented midpoint; interior horizontal
  // edges get one midpoint, except every third row which gets a two-point
  // zigzag, so interior cells come out as octagons and nonagons.
  std::map<std::tuple<int, int, int>, int> vpoint; // (column i, row j, 0)
  std::map<std::tuple<int, int, int>, int> hpoint; // (i, row r, sub)
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double sign = ((i + j) % 2 == 0) ? -1.0 : 1.0;
      Point p(rect.x0 + i * sx + sign * indent * sx, rect.y0 + (j + 0.5) * sy);
      vpoint[{i, j, 0}] = static_cast<int>(verts.size());
      verts.push_back(p);
    }
  for (int r = 1; r < n; ++r)
    for (int i = 0; i < n; ++i) {
      const double y = rect.y0 + r * sy;
      if (r % 3 == 0) {
        const double sign = ((i + r) % 2 == 0) ? 1.0 : -1.0;
        Point p1(rect.x0 + (i + 1.0 / 3.0) * sx, y + sign * 0.5 * indent * sy);
        Point p2(rect.x0 + (i + 2.0 / 3.0) * sx, y - sign * 0.5 * indent * sy);
        hpoint[{i, r, 0}] = static_cast<int>(verts.size());
        verts.push_back(p1);
        hpoint[{i, r, 1}] = static_cast<int>(verts.size());
        verts.push_back(p2);
      } else {
        const double sign = ((i + r) % 2 == 0) ? -1.0 : 1.0;
        Point p(rect.x0 + (i + 0.5) * sx, y + sign * indent * sy);
        hpoint[{i, r, 0}] = static_cast<int>(verts.size());
        verts.push_back(p);
      }
    }

  std::vector<std::vector<int>> cells;
  cells.reserve(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      std::vector<int> loop;
      loop.push_back(vid(i, j)); // bottom edge, left to right
      if (j > 0) {
        loop.push_back(hpoint.at({i, j, 0}));
        if (j % 3 == 0) loop.push_back(hpoint.at({i, j, 1}));
      }
      loop.push_back(vid(i + 1, j)); // right edge, bottom to top
      if (i + 1 < n) loop.push_back(vpoint.at({i + 1, j, 0}));
      loop.push_back(vid(i + 1, j + 1)); // top edge, right to left
      if (j + 1 < n) {
        if ((j + 1) % 3 == 0) loop.push_back(hpoint.at({i, j + 1, 1}));
        loop.push_back(hpoint.at({i, j + 1, 0}));
      }
      loop.push_back(vid(i, j + 1)); // left edge, top to bottom
      if (i > 0) loop.push_back(vpoint.at({i, j, 0}));
      cells.push_back(loop);
    }
  auto btags = tag_boundary(verts, cells, tag_rule);
  auto flags = flag_obs_cells(verts, cells, obs);
  return PolyMesh(std::move(verts), std::move(cells), btags, std::move(flags));
}

} // namespace vemocp
