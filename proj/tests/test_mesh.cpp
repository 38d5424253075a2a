#include <doctest.h>

#include <set>

#include "rmfit/mesh.hpp"

using namespace rmfit;

TEST_CASE("homogeneous quad mesh counts and layout") {
  const Mesh mesh = build_homogeneous_mesh(2, ElementFamily::Q2NQ2, 1, 1.0);
  CHECK(mesh.nx == 2);
  CHECK(mesh.ny == 2);
  CHECK(mesh.n_nodes() == 25);  // (2*2+1)^2 half-grid lattice
  CHECK(mesh.n_elements() == 4);
  CHECK(mesh.edges.size() == 12);  // nx*(ny+1) + ny*(nx+1)
  CHECK(mesh.boundary_nodes.size() == 16);
  CHECK(mesh.face_left.size() == 5);
  CHECK(mesh.face_bottom.size() == 5);

  // corners BL, BR, TL, TR at the domain corners
  CHECK((mesh.nodes[mesh.corners[0]] - Eigen::Vector2d(-0.5, -0.5)).norm() < 1e-14);
  CHECK((mesh.nodes[mesh.corners[1]] - Eigen::Vector2d(0.5, -0.5)).norm() < 1e-14);
  CHECK((mesh.nodes[mesh.corners[2]] - Eigen::Vector2d(-0.5, 0.5)).norm() < 1e-14);
  CHECK((mesh.nodes[mesh.corners[3]] - Eigen::Vector2d(0.5, 0.5)).norm() < 1e-14);

  // element edges connect the element's corner nodes in (bottom,right,top,left)
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& conn = mesh.elements[e];
    const int expect[4][2] = {{conn[0], conn[1]},
                              {conn[1], conn[2]},
                              {conn[3], conn[2]},
                              {conn[0], conn[3]}};
    for (int le = 0; le < 4; ++le) {
      const auto& edge = mesh.edges[mesh.elem_edges[e][le]];
      const std::set<int> got{edge[0], edge[1]};
      const std::set<int> want{expect[le][0], expect[le][1]};
      CHECK(got == want);
      CHECK(mesh.elem_edge_signs[e][le] == 1);  // lexicographic orientation
    }
  }
}

TEST_CASE("element node order follows the reference layout") {
  const Mesh mesh = build_homogeneous_mesh(1, ElementFamily::Q2, 1, 2.0);
  REQUIRE(mesh.n_elements() == 1);
  const auto& conn = mesh.elements[0];
  // corners BL,BR,TR,TL then mids bottom,right,top,left then center
  const Eigen::Vector2d expect[9] = {
      {-1, -1}, {1, -1}, {1, 1},  {-1, 1}, {0, -1},
      {1, 0},   {0, 1},  {-1, 0}, {0, 0}};
  for (int k = 0; k < 9; ++k)
    CHECK((mesh.nodes[conn[k]] - expect[k]).norm() < 1e-14);
}

TEST_CASE("swiss-cross mesh resolves the inclusion exactly") {
  const UnitCellGeometry geom;  // l1 = 0.9 l, l2 = 0.3 l
  const Mesh mesh = build_heterogeneous_mesh(geom, 1, 1);
  CHECK(mesh.family == ElementFamily::T2);
  CHECK(mesh.nx == 20);
  CHECK(mesh.n_elements() == 2 * 20 * 20);
  CHECK(!mesh.material.empty());
  // cross area = 2*l1*l2 - l2^2 = 0.54 - 0.09 = 0.45; interfaces sit on grid
  // lines, so the discrete fraction is exact
  CHECK(mesh.inclusion_area_fraction() == doctest::Approx(0.45).epsilon(1e-12));
}

TEST_CASE("swiss-cross mesh scales with cell count and refinement") {
  const UnitCellGeometry geom;
  const Mesh m21 = build_heterogeneous_mesh(geom, 2, 1);
  CHECK(m21.nx == 40);
  CHECK(m21.l == doctest::Approx(1.0));  // domain fixed, cells shrink
  CHECK(m21.inclusion_area_fraction() == doctest::Approx(0.45).epsilon(1e-12));
  const Mesh m12 = build_heterogeneous_mesh(geom, 1, 2);
  CHECK(m12.nx == 40);
  CHECK(m12.inclusion_area_fraction() == doctest::Approx(0.45).epsilon(1e-12));
}

TEST_CASE("periodic pairs cover both faces and the slave corners") {
  const UnitCellGeometry geom;
  const Mesh mesh = build_heterogeneous_mesh(geom, 1, 1);
  const PeriodicPairs pairs = periodic_pairs(mesh);
  // M = 2*nx+1 nodes per face trace; 2*(M-2) non-corner pairs + 3 corners
  const int M = 2 * mesh.nx + 1;
  CHECK(static_cast<int>(pairs.pairs.size()) == 2 * (M - 2) + 3);
  CHECK(pairs.pin == mesh.corners[0]);
  // every slave appears exactly once and never equals a master
  std::set<int> slaves;
  for (const auto& [m, s] : pairs.pairs) {
    CHECK(m != s);
    CHECK(slaves.insert(s).second);
  }
  CHECK(slaves.count(pairs.pin) == 0);
}
