#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "rmfit/materials.hpp"

namespace rmfit {

enum class ElementFamily { T2, Q2, Q2NQ2 };

// Swiss-cross unit cell: square cell of edge l with a plus-shaped inclusion,
// arm span l1 = l1_factor*l, arm width l2 = l2_factor*l, both centered.
// The computational domain is always the fixed square [-l/2, l/2]^2; with n
// cells per direction each cell has edge l/n.
struct UnitCellGeometry {
  double l = 1.0;          // domain edge / unit-cell edge at n=1 [mm]
  double l1_factor = 0.9;  // arm span as fraction of the cell edge
  double l2_factor = 0.3;  // arm width as fraction of the cell edge
  IsotropicLame matrix{51.08, 26.32};
  IsotropicLame inclusion{51.08e-4, 26.32e-4};

  void validate() const;  // throws std::invalid_argument
};

// Structured mesh of [-l/2, l/2]^2. All nodes live on the (2*nx+1) x (2*ny+1)
// half-grid lattice (vertices at even indices, midside/center nodes at odd
// indices), numbered lexicographically. T2 elements use entries 0..5 of the
// connectivity row, Q2/Q2NQ2 all 9.
//
// Q2 node order: corners BL,BR,TR,TL; midsides bottom,right,top,left; center.
// T2 node order: vertices v0,v1,v2 (CCW); midsides m01,m12,m20.
struct Mesh {
  ElementFamily family = ElementFamily::Q2;
  double l = 1.0;
  int nx = 0, ny = 0;  // grid cells per direction
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 9>> elements;
  std::vector<int> material;  // per element: 0 matrix, 1 inclusion; empty if homogeneous

  // Oriented corner-node edges (quad families only). Stored (a, b) with a < b;
  // the global orientation is a -> b. elem_edges lists (bottom,right,top,left)
  // per quad; elem_edge_signs is +1 when the global orientation matches the
  // local canonical direction (+x for bottom/top, +y for left/right).
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 4>> elem_edges;
  std::vector<std::array<int, 4>> elem_edge_signs;

  std::vector<int> boundary_nodes;            // sorted, unique
  std::vector<int> face_left, face_right;     // sorted by y, corners included
  std::vector<int> face_bottom, face_top;     // sorted by x, corners included
  std::array<int, 4> corners{-1, -1, -1, -1}; // BL, BR, TL, TR

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  int nodes_per_element() const { return family == ElementFamily::T2 ? 6 : 9; }
  bool is_boundary_node(int n) const;
  double inclusion_area_fraction() const;
};

// Triangulated mesh of n x n swiss-cross cells; grid spacing l/(n*20*refine)
// so every material interface coincides with grid lines.
Mesh build_heterogeneous_mesh(const UnitCellGeometry& geom, int n, int refine);

// Homogeneous quad mesh with n_cells_hint*refine cells per direction.
Mesh build_homogeneous_mesh(int n_cells_hint, ElementFamily family,
                            int refine = 1, double l = 1.0);

struct PeriodicPairs {
  std::vector<std::pair<int, int>> pairs;  // (master, slave)
  int pin = -1;                            // translation pin (master corner)
};

// Face-to-face node pairing: right->left, top->bottom (non-corner nodes),
// plus the three non-master corners slaved to the BL corner. Throws on
// non-matching opposite traces.
PeriodicPairs periodic_pairs(const Mesh& mesh);

// Plain-text node/element dump for debugging.
void export_mesh(const Mesh& mesh, const std::string& path);

}  // namespace rmfit
