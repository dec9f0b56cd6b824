#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "vemocp/mesh.hpp"
#include "vemocp/presets.hpp"

using namespace vemocp;

namespace {

std::string write_temp(const std::string& content) {
  static int counter = 0;
  std::string path = "test_mesh_tmp_" + std::to_string(counter++) + ".json";
  std::ofstream out(path);
  out << content;
  return path;
}

TagRule all_dirichlet() {
  return [](const Point&) { return BoundaryTag::Dirichlet; };
}

} // namespace

TEST_CASE("load unit square single cell") {
  auto path = write_temp(R"({
    "vertices": [[0,0],[1,0],[1,1],[0,1]],
    "cells": [[0,1,2,3]],
    "boundary": [{"edge":[0,1],"tag":"dirichlet"},{"edge":[1,2],"tag":"dirichlet"},
                 {"edge":[2,3],"tag":"dirichlet"},{"edge":[0,3],"tag":"control"}],
    "obs_cells": [0]
  })");
  PolyMesh mesh = load_mesh(path);
  CHECK(mesh.n_cells() == 1);
  int n_boundary = 0;
  for (const auto& e : mesh.edges())
    if (e.on_boundary()) ++n_boundary;
  CHECK(n_boundary == 4);
  CHECK(mesh.edges_with_tag(BoundaryTag::Control).size() == 1);
  CHECK(mesh.obs_flag(0));
  std::remove(path.c_str());
}

TEST_CASE("load 2x2 cartesian file") {
  PolyMesh gen = generate_cartesian(2, 2, Rect{0, 0, 1, 1}, all_dirichlet());
  auto path = write_temp("");
  save_mesh(gen, path);
  PolyMesh mesh = load_mesh(path);
  CHECK(mesh.n_cells() == 4);
  CHECK(mesh.n_vertices() == 9);
  int n_boundary = 0;
  for (const auto& e : mesh.edges())
    if (e.on_boundary()) ++n_boundary;
  CHECK(n_boundary == 8);
  CHECK(mesh.n_edges() == 12);
  std::remove(path.c_str());
}

TEST_CASE("clockwise cell is rejected") {
  auto path = write_temp(R"({
    "vertices": [[0,0],[1,0],[1,1],[0,1]],
    "cells": [[0,3,2,1]],
    "boundary": [{"edge":[0,1],"tag":"dirichlet"},{"edge":[1,2],"tag":"dirichlet"},
                 {"edge":[2,3],"tag":"dirichlet"},{"edge":[0,3],"tag":"dirichlet"}]
  })");
  CHECK_THROWS_WITH_AS(load_mesh(path), doctest::Contains("negative area"), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("untagged boundary edge is rejected") {
  auto path = write_temp(R"({
    "vertices": [[0,0],[1,0],[1,1],[0,1]],
    "cells": [[0,1,2,3]],
    "boundary": [{"edge":[0,1],"tag":"dirichlet"}]
  })");
  CHECK_THROWS_WITH_AS(load_mesh(path), doctest::Contains("untagged"), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("generate_cartesian geometry") {
  PolyMesh mesh = generate_cartesian(2, 2, Rect{0, 0, 1, 1}, presets::test1_tags());
  CHECK(mesh.n_cells() == 4);
  for (int c = 0; c < 4; ++c) {
    CellGeometry g = cell_geometry(mesh, c);
    CHECK(g.area == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(g.diameter == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
  }
  // Test-1 partition: edges with midpoint x1 = 0 are the control boundary.
  for (int e : mesh.edges_with_tag(BoundaryTag::Control)) {
    Point mid = 0.5 * (mesh.vertex(mesh.edge(e).v0) + mesh.vertex(mesh.edge(e).v1));
    CHECK(mid.x() == doctest::Approx(0.0));
  }
  CHECK(mesh.edges_with_tag(BoundaryTag::Control).size() == 2);
  CHECK(mesh.edges_with_tag(BoundaryTag::Dirichlet).size() == 6);
  CHECK_THROWS(generate_cartesian(0, 2, Rect{0, 0, 1, 1}, all_dirichlet()));
  CHECK_THROWS(generate_cartesian(2, 2, Rect{0, 0, 0, 1}, all_dirichlet()));
}

TEST_CASE("cell_geometry closed forms") {
  PolyMesh sq = generate_cartesian(1, 1, Rect{0, 0, 1, 1}, all_dirichlet());
  CellGeometry g = cell_geometry(sq, 0);
  CHECK(g.area == doctest::Approx(1.0));
  CHECK(g.centroid.x() == doctest::Approx(0.5));
  CHECK(g.centroid.y() == doctest::Approx(0.5));
  CHECK(g.diameter == doctest::Approx(std::sqrt(2.0)));

  // Triangle (0,0),(1,0),(0,1).
  PolyMesh tri({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}},
               {{0, 1, BoundaryTag::Dirichlet},
                {1, 2, BoundaryTag::Dirichlet},
                {0, 2, BoundaryTag::Dirichlet}},
               {});
  CellGeometry tg = cell_geometry(tri, 0);
  CHECK(tg.area == doctest::Approx(0.5));
  CHECK(tg.centroid.x() == doctest::Approx(1.0 / 3.0));
  CHECK(tg.centroid.y() == doctest::Approx(1.0 / 3.0));

  // L-shaped hexagon, shoelace by hand: |E| = 3.
  PolyMesh lshape({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}, {{0, 1, 2, 3, 4, 5}},
                  {{0, 1, BoundaryTag::Dirichlet},
                   {1, 2, BoundaryTag::Dirichlet},
                   {2, 3, BoundaryTag::Dirichlet},
                   {3, 4, BoundaryTag::Dirichlet},
                   {4, 5, BoundaryTag::Dirichlet},
                   {0, 5, BoundaryTag::Dirichlet}},
                  {});
  CHECK(cell_geometry(lshape, 0).area == doctest::Approx(3.0));
}

TEST_CASE("validate quality constants") {
  PolyMesh sq = generate_cartesian(1, 1, Rect{0, 0, 1, 1}, all_dirichlet());
  MeshQuality q = validate(sq);
  CHECK(q.kappa_edge == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(q.kappa_star_shape > 0.0);

  // Regular hexagon: convex, so trivially star-shaped.
  std::vector<Point> hexv;
  for (int i = 0; i < 6; ++i)
    hexv.emplace_back(std::cos(M_PI * i / 3.0), std::sin(M_PI * i / 3.0));
  std::vector<std::tuple<int, int, BoundaryTag>> tags;
  for (int i = 0; i < 6; ++i) tags.emplace_back(i, (i + 1) % 6, BoundaryTag::Dirichlet);
  PolyMesh hex(hexv, {{0, 1, 2, 3, 4, 5}}, tags, {});
  CHECK(validate(hex).kappa_star_shape > 0.0);

  // Zero-length edge (two coincident vertices).
  PolyMesh degen({{0, 0}, {1, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 3, 4}},
                 {{0, 1, BoundaryTag::Dirichlet},
                  {1, 2, BoundaryTag::Dirichlet},
                  {2, 3, BoundaryTag::Dirichlet},
                  {3, 4, BoundaryTag::Dirichlet},
                  {0, 4, BoundaryTag::Dirichlet}},
                 {});
  CHECK_THROWS_WITH_AS(validate(degen), doctest::Contains("cell 0"), std::runtime_error);
}

TEST_CASE("validate: kappa constants are nx-independent") {
  MeshQuality q4 = validate(generate_cartesian(4, 4, Rect{0, 0, 1, 1}, all_dirichlet()));
  MeshQuality q16 = validate(generate_cartesian(16, 16, Rect{0, 0, 1, 1}, all_dirichlet()));
  CHECK(q4.kappa_edge == doctest::Approx(q16.kappa_edge).epsilon(1e-12));
  CHECK(q4.kappa_star_shape == doctest::Approx(q16.kappa_star_shape).epsilon(1e-12));
}

TEST_CASE("star mesh: areas, star-shape, vertex counts") {
  for (int n : {2, 4, 5}) {
    PolyMesh mesh = generate_star(n, Rect{0, 0, 1, 1}, presets::test1_tags());
    CHECK(mesh.domain_area() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_NOTHROW(validate(mesh)); // every cell star-shaped w.r.t. centroid
  }
  PolyMesh m4 = generate_star(4, Rect{0, 0, 1, 1}, all_dirichlet());
  // Interior cells are octagons or nonagons.
  bool saw8 = false, saw9 = false;
  for (int c = 0; c < m4.n_cells(); ++c) {
    const int i = c % 4, j = c / 4;
    if (i == 0 || i == 3 || j == 0 || j == 3) continue;
    const size_t nv = m4.cell(c).size();
    CHECK(nv >= 8);
    CHECK(nv <= 9);
    saw8 |= nv == 8;
    saw9 |= nv == 9;
  }
  CHECK(saw8);
  CHECK(saw9);
  CHECK_THROWS(generate_star(1, Rect{0, 0, 1, 1}, all_dirichlet()));
}

TEST_CASE("mesh invariants: area sum, Euler relation, control cover") {
  for (auto mesh : {generate_cartesian(10, 5, Rect{0, 0, 2, 1}, presets::test2_tags(), presets::test2_obs()),
                    generate_star(6, Rect{0, 0, 1, 1}, presets::test1_tags())}) {
    double sum = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) sum += cell_geometry(mesh, c).area;
    CHECK(sum == doctest::Approx(mesh.domain_area()).epsilon(1e-12));
    CHECK(mesh.n_vertices() - mesh.n_edges() + mesh.n_cells() == 1);
    for (int e : mesh.edges_with_tag(BoundaryTag::Control))
      CHECK(mesh.edge(e).on_boundary());
  }
  // Control edges of the generated test2 mesh cover (1,2)x{0,1}: length 2.
  PolyMesh t2 = generate_cartesian(10, 5, Rect{0, 0, 2, 1}, presets::test2_tags(), presets::test2_obs());
  double clen = 0.0;
  for (int e : t2.edges_with_tag(BoundaryTag::Control))
    clen += (t2.vertex(t2.edge(e).v0) - t2.vertex(t2.edge(e).v1)).norm();
  CHECK(clen == doctest::Approx(2.0));
  CHECK(t2.n_obs_cells() == 10); // (1,2)x(0,0.2) and (1,2)x(0.8,1), 5 cells each
}

TEST_CASE("observation straddle is rejected") {
  // 3 rows on (0,2)x(0,1): cells cross y = 0.2 and y = 0.8.
  CHECK_THROWS_WITH_AS(
      generate_cartesian(4, 3, Rect{0, 0, 2, 1}, presets::test2_tags(), presets::test2_obs()),
      doctest::Contains("straddles"), std::runtime_error);
}
