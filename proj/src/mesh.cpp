#include "rmfit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace rmfit {

namespace {

constexpr double kCoordTol = 1e-12;

int lattice_id(int i, int j, int width) { return j * width + i; }

bool in_cross(const Eigen::Vector2d& p_local, double cell, double l1, double l2) {
  // p_local relative to cell center
  const double ax = std::abs(p_local.x());
  const double ay = std::abs(p_local.y());
  (void)cell;
  const bool horiz = ax <= 0.5 * l1 && ay <= 0.5 * l2;
  const bool vert = ax <= 0.5 * l2 && ay <= 0.5 * l1;
  return horiz || vert;
}

}  // namespace

void UnitCellGeometry::validate() const {
  if (!(l > 0.0) || !(l2_factor > 0.0) || !(l1_factor > l2_factor) ||
      !(l1_factor < 1.0)) {
    throw std::invalid_argument("UnitCellGeometry: need 0 < l2 < l1 < l");
  }
  if (!matrix.positive_definite() || !inclusion.positive_definite()) {
    throw std::invalid_argument("UnitCellGeometry: Lame pairs must be positive definite");
  }
}

bool Mesh::is_boundary_node(int n) const {
  return std::binary_search(boundary_nodes.begin(), boundary_nodes.end(), n);
}

double Mesh::inclusion_area_fraction() const {
  if (material.empty()) return 0.0;
  double total = 0.0, incl = 0.0;
  for (int e = 0; e < n_elements(); ++e) {
    double area;
    if (family == ElementFamily::T2) {
      const auto& a = nodes[elements[e][0]];
      const auto& b = nodes[elements[e][1]];
      const auto& c = nodes[elements[e][2]];
      area = 0.5 * std::abs((b.x() - a.x()) * (c.y() - a.y()) -
                            (c.x() - a.x()) * (b.y() - a.y()));
    } else {
      const auto& a = nodes[elements[e][0]];
      const auto& c = nodes[elements[e][2]];
      area = std::abs((c.x() - a.x()) * (c.y() - a.y()));
    }
    total += area;
    if (material[e] == 1) incl += area;
  }
  return incl / total;
}

namespace {

// Shared lattice/grid construction for both families.
void build_grid(Mesh& mesh, int cells, double l) {
  mesh.nx = mesh.ny = cells;
  mesh.l = l;
  const int w = 2 * cells + 1;
  mesh.nodes.resize(static_cast<size_t>(w) * w);
  const double h = l / (2.0 * cells);
  for (int j = 0; j < w; ++j)
    for (int i = 0; i < w; ++i)
      mesh.nodes[lattice_id(i, j, w)] = Eigen::Vector2d(-0.5 * l + i * h, -0.5 * l + j * h);

  // boundary bookkeeping
  mesh.face_left.clear();
  mesh.face_right.clear();
  mesh.face_bottom.clear();
  mesh.face_top.clear();
  for (int j = 0; j < w; ++j) {
    mesh.face_left.push_back(lattice_id(0, j, w));
    mesh.face_right.push_back(lattice_id(w - 1, j, w));
  }
  for (int i = 0; i < w; ++i) {
    mesh.face_bottom.push_back(lattice_id(i, 0, w));
    mesh.face_top.push_back(lattice_id(i, w - 1, w));
  }
  mesh.corners = {lattice_id(0, 0, w), lattice_id(w - 1, 0, w),
                  lattice_id(0, w - 1, w), lattice_id(w - 1, w - 1, w)};
  mesh.boundary_nodes.clear();
  for (auto* face : {&mesh.face_left, &mesh.face_right, &mesh.face_bottom, &mesh.face_top})
    mesh.boundary_nodes.insert(mesh.boundary_nodes.end(), face->begin(), face->end());
  std::sort(mesh.boundary_nodes.begin(), mesh.boundary_nodes.end());
  mesh.boundary_nodes.erase(
      std::unique(mesh.boundary_nodes.begin(), mesh.boundary_nodes.end()),
      mesh.boundary_nodes.end());
}

std::array<int, 9> quad_nodes(int cx, int cy, int w) {
  const int i = 2 * cx, j = 2 * cy;
  return {lattice_id(i, j, w),         lattice_id(i + 2, j, w),
          lattice_id(i + 2, j + 2, w), lattice_id(i, j + 2, w),
          lattice_id(i + 1, j, w),     lattice_id(i + 2, j + 1, w),
          lattice_id(i + 1, j + 2, w), lattice_id(i, j + 1, w),
          lattice_id(i + 1, j + 1, w)};
}

}  // namespace

Mesh build_heterogeneous_mesh(const UnitCellGeometry& geom, int n, int refine) {
  geom.validate();
  if (n < 1 || refine < 1)
    throw std::invalid_argument("build_heterogeneous_mesh: n >= 1 and refine >= 1 required");

  // 20 grid cells per unit cell keeps the cross interfaces (at +-0.45*cell,
  // +-0.15*cell) on grid lines for any refine; assert the alignment anyway.
  const int per_cell = 20 * refine;
  const double cell = geom.l / n;
  const double spacing = cell / per_cell;
  const double b1 = 0.5 * geom.l1_factor * cell;
  const double b2 = 0.5 * geom.l2_factor * cell;
  for (double b : {b1, b2}) {
    const double k = b / spacing;
    if (std::abs(k - std::round(k)) > 1e-9)
      throw std::logic_error("heterogeneous mesh: interface not grid-aligned");
  }

  Mesh mesh;
  mesh.family = ElementFamily::T2;
  const int cells = n * per_cell;
  build_grid(mesh, cells, geom.l);
  const int w = 2 * cells + 1;

  const double l1 = geom.l1_factor * cell;
  const double l2 = geom.l2_factor * cell;

  mesh.elements.reserve(2 * static_cast<size_t>(cells) * cells);
  mesh.material.reserve(mesh.elements.capacity());
  for (int cy = 0; cy < cells; ++cy) {
    for (int cx = 0; cx < cells; ++cx) {
      const auto q = quad_nodes(cx, cy, w);
      // Diagonal split with the orientation mirrored across the domain center
      // lines (union-jack quadrants): keeps the mesh invariant under the full
      // square symmetry group, so symmetric loadings see symmetric stiffness.
      // Either diagonal's midpoint is the quad center node.
      const bool bltr = (cx < cells / 2) == (cy < cells / 2);
      const std::array<int, 9> t1 =
          bltr ? std::array<int, 9>{q[0], q[1], q[2], q[4], q[5], q[8], -1, -1, -1}
               : std::array<int, 9>{q[0], q[1], q[3], q[4], q[8], q[7], -1, -1, -1};
      const std::array<int, 9> t2 =
          bltr ? std::array<int, 9>{q[0], q[2], q[3], q[8], q[6], q[7], -1, -1, -1}
               : std::array<int, 9>{q[1], q[2], q[3], q[5], q[6], q[8], -1, -1, -1};
      for (const auto& t : {t1, t2}) {
        const Eigen::Vector2d centroid =
            (mesh.nodes[t[0]] + mesh.nodes[t[1]] + mesh.nodes[t[2]]) / 3.0;
        // locate owning unit cell
        const double ux = std::floor((centroid.x() + 0.5 * geom.l) / cell);
        const double uy = std::floor((centroid.y() + 0.5 * geom.l) / cell);
        const Eigen::Vector2d center(-0.5 * geom.l + (ux + 0.5) * cell,
                                     -0.5 * geom.l + (uy + 0.5) * cell);
        mesh.elements.push_back(t);
        mesh.material.push_back(in_cross(centroid - center, cell, l1, l2) ? 1 : 0);
      }
    }
  }
  return mesh;
}

Mesh build_homogeneous_mesh(int n_cells_hint, ElementFamily family, int refine,
                            double l) {
  if (family == ElementFamily::T2)
    throw std::invalid_argument("build_homogeneous_mesh: quad families only");
  if (n_cells_hint < 1 || refine < 1)
    throw std::invalid_argument("build_homogeneous_mesh: positive sizes required");

  Mesh mesh;
  mesh.family = family;
  const int cells = n_cells_hint * refine;
  build_grid(mesh, cells, l);
  const int w = 2 * cells + 1;

  std::map<std::pair<int, int>, int> edge_ids;
  auto edge_of = [&](int a, int b) {
    auto key = std::minmax(a, b);
    auto it = edge_ids.find(key);
    if (it != edge_ids.end()) return it->second;
    const int id = static_cast<int>(mesh.edges.size());
    mesh.edges.push_back({key.first, key.second});
    edge_ids.emplace(key, id);
    return id;
  };

  for (int cy = 0; cy < cells; ++cy) {
    for (int cx = 0; cx < cells; ++cx) {
      const auto q = quad_nodes(cx, cy, w);
      mesh.elements.push_back(q);
      if (family == ElementFamily::Q2NQ2) {
        // bottom, right, top, left; local canonical directions +x,+y,+x,+y
        const std::array<std::pair<int, int>, 4> loc = {
            std::pair{q[0], q[1]}, {q[1], q[2]}, {q[3], q[2]}, {q[0], q[3]}};
        std::array<int, 4> ids{}, signs{};
        for (int k = 0; k < 4; ++k) {
          ids[k] = edge_of(loc[k].first, loc[k].second);
          signs[k] = loc[k].first < loc[k].second ? 1 : -1;
        }
        mesh.elem_edges.push_back(ids);
        mesh.elem_edge_signs.push_back(signs);
      }
    }
  }
  return mesh;
}

PeriodicPairs periodic_pairs(const Mesh& mesh) {
  PeriodicPairs out;
  auto check_and_pair = [&](const std::vector<int>& master_face,
                            const std::vector<int>& slave_face, int axis) {
    if (master_face.size() != slave_face.size())
      throw std::runtime_error("periodic_pairs: opposite face node counts differ");
    for (size_t k = 0; k < master_face.size(); ++k) {
      const int m = master_face[k], s = slave_face[k];
      if (std::abs(mesh.nodes[m][axis] - mesh.nodes[s][axis]) > kCoordTol * std::max(1.0, mesh.l))
        throw std::runtime_error("periodic_pairs: opposite face traces do not match");
      const bool corner = std::count(mesh.corners.begin(), mesh.corners.end(), s) > 0;
      if (!corner) out.pairs.emplace_back(m, s);
    }
  };
  // left->right matched by y, bottom->top matched by x
  check_and_pair(mesh.face_left, mesh.face_right, 1);
  check_and_pair(mesh.face_bottom, mesh.face_top, 0);
  out.pin = mesh.corners[0];
  for (int c : {mesh.corners[1], mesh.corners[2], mesh.corners[3]})
    out.pairs.emplace_back(out.pin, c);
  return out;
}

void export_mesh(const Mesh& mesh, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("export_mesh: cannot open " + path);
  std::fprintf(f, "# nodes %d\n", mesh.n_nodes());
  for (const auto& p : mesh.nodes) std::fprintf(f, "%.17g %.17g\n", p.x(), p.y());
  std::fprintf(f, "# elements %d (nodes per element %d)\n", mesh.n_elements(),
               mesh.nodes_per_element());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    for (int k = 0; k < mesh.nodes_per_element(); ++k)
      std::fprintf(f, "%d ", mesh.elements[e][k]);
    std::fprintf(f, "%d\n", mesh.material.empty() ? -1 : mesh.material[e]);
  }
  std::fclose(f);
}

}  // namespace rmfit
