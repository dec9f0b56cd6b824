// Polygonal mesh data model: conforming tessellations with tagged boundary
// edges and observation-region cell flags, plus generators (Cartesian, Star),
// JSON import/export and validation of the mesh regularity assumptions
// (star-shapedness of cells, minimal edge length).

#ifndef VEMOCP_MESH_HPP
#define VEMOCP_MESH_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vemocp {

using Point = Eigen::Vector2d;

enum class BoundaryTag { Interior, Dirichlet, Neumann, Control };

std::string to_string(BoundaryTag tag);
BoundaryTag tag_from_string(const std::string& s);

/// Axis-aligned rectangle, used by the mesh generators.
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

struct Edge {
  int v0, v1;                        // canonical: v0 < v1
  std::array<int, 2> cells{-1, -1};  // incident cells, cells[1] = -1 on boundary
  BoundaryTag tag = BoundaryTag::Interior;
  bool on_boundary() const { return cells[1] < 0; }
};

struct CellGeometry {
  double area;
  Point centroid;
  double diameter;                       // max pairwise vertex distance
  std::vector<double> edge_lengths;      // per loop edge
  std::vector<std::array<Point, 3>> fan; // triangles (centroid, v_i, v_{i+1})
};

struct MeshQuality {
  double kappa_star_shape; // min over cells of dist(centroid, edge lines)/h_E
  double kappa_edge;       // min over cells of min_e |e|/h_E
  int worst_star_cell = -1;
  int worst_edge_cell = -1;
};

/// Assigns a boundary tag given an edge midpoint.
using TagRule = std::function<BoundaryTag(const Point&)>;
/// Classifies a point w.r.t. the observation region: +1 inside, 0 on its
/// boundary, -1 outside. A null rule means the whole domain is observed.
using ObsRule = std::function<int(const Point&)>;

/// Immutable conforming polygonal mesh. Cells are counterclockwise
/// vertex-index loops; every boundary edge carries exactly one
/// non-Interior tag; obs_flag marks the cells of the observation region.
class PolyMesh {
public:
  /// Builds and fully checks a mesh from raw parts. boundary_tags lists
  /// (v0, v1, tag) for every boundary edge; throws on any structural defect.
  PolyMesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells,
           const std::vector<std::tuple<int, int, BoundaryTag>>& boundary_tags,
           std::vector<bool> obs_flags);

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_cells() const { return static_cast<int>(cells_.size()); }
  int n_edges() const { return static_cast<int>(edges_.size()); }

  const Point& vertex(int v) const { return vertices_[v]; }
  const std::vector<int>& cell(int c) const { return cells_[c]; }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Edge index of the loop edge (cell vertex i -> i+1).
  int cell_edge(int c, int i) const { return cell_edges_[c][i]; }
  bool obs_flag(int c) const { return obs_flags_[c]; }
  int n_obs_cells() const;

  /// Edges carrying the given boundary tag.
  std::vector<int> edges_with_tag(BoundaryTag tag) const;
  double domain_area() const;
  /// Max cell diameter (the mesh size h).
  double mesh_size() const;

private:
  std::vector<Point> vertices_;
  std::vector<std::vector<int>> cells_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> cell_edges_;
  std::vector<bool> obs_flags_;
};

/// Reads a mesh from the JSON schema
///   { "vertices": [[x,y],...], "cells": [[i0,i1,...],...],
///     "boundary": [{"edge":[i,j],"tag":"dirichlet|neumann|control"},...],
///     "obs_cells": [indices] }.
/// Unlisted boundary edges are an error.
PolyMesh load_mesh(const std::string& path);
void save_mesh(const PolyMesh& mesh, const std::string& path);

/// nx x ny tessellation of squares of rect, boundary tags from tag_rule
/// applied to edge midpoints, observation flags from obs (null = whole
/// domain observed).
PolyMesh generate_cartesian(int nx, int ny, const Rect& rect, const TagRule& tag_rule,
                            const ObsRule& obs = nullptr);

/// n x n grid whose interior edges are indented so interior cells become
/// non-convex octagons and nonagons, star-shaped w.r.t. their centroids.
/// indent is the indentation depth as a fraction of the edge length.
PolyMesh generate_star(int n, const Rect& rect, const TagRule& tag_rule,
                       double indent = 0.2, const ObsRule& obs = nullptr);

/// Checks the regularity assumptions: every cell star-shaped w.r.t. its
/// centroid and min |e|/h_E above the floor. Throws naming the offending
/// cell when a quality estimate falls at or below the floor.
MeshQuality validate(const PolyMesh& mesh, double floor = 1e-6);

/// Area (shoelace), centroid, diameter, edge lengths and the fan
/// triangulation from the centroid of one cell.
CellGeometry cell_geometry(const PolyMesh& mesh, int c);

} // namespace vemocp

#endif
