#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <functional>
#include <memory>
#include <vector>

#include "rmfit/loading.hpp"
#include "rmfit/mesh.hpp"
#include "rmfit/models.hpp"

namespace rmfit {

// Global DOF layout: displacement u first (2 per node), then the micro field
// depending on the discretization:
//   Nedelec     - per P row r in {0,1}: 2 DOFs per oriented edge + 4 per element
//   LagrangeVec - 4 components (P11,P12,P21,P22) per node
//   LagrangeSkew- 1 scalar (A12) per node
struct DofMap {
  PDisc disc = PDisc::None;
  int n_nodes = 0, n_edges = 0, n_elems = 0;
  int p_offset = 0;   // first micro-field DOF
  int p_row_stride = 0;  // Nedelec DOFs per P row
  int n_dofs = 0;

  int u_dof(int node, int comp) const { return 2 * node + comp; }
  int p_edge_dof(int row, int edge, int m) const {
    return p_offset + row * p_row_stride + 2 * edge + m;
  }
  int p_interior_dof(int row, int elem, int k) const {
    return p_offset + row * p_row_stride + 2 * n_edges + 4 * elem + k;
  }
  int p_node_dof(int node, int comp) const { return p_offset + 4 * node + comp; }
  int a_dof(int node) const { return p_offset + node; }

  static DofMap build(const Mesh& mesh, PDisc disc);
};

// Per-element evaluation context: local DOF list and the 18-row state
// B-matrix (state = B * d_local) at reference points.
class ElementContext {
 public:
  ElementContext(const Mesh& mesh, const DofMap& dm, int elem);

  const std::vector<int>& dofs() const { return dofs_; }
  int n_local() const { return static_cast<int>(dofs_.size()); }

  // Fills B (kStateDim x n_local) and the Jacobian determinant at xi.
  void eval(const Eigen::Vector2d& xi, Eigen::MatrixXd& B, double& detj) const;

 private:
  const Mesh& mesh_;
  const DofMap& dm_;
  int elem_;
  Eigen::Matrix2d jac_, jac_inv_;
  double detj_;
  std::vector<int> dofs_;
};

// Stiffness of the model's quadratic energy, Pi(d) = 1/2 d^T K d (no body
// force; loading enters through constraints). Heterogeneous linear elasticity
// resolves the Lame pair per element from the mesh material tags.
Eigen::SparseMatrix<double> assemble(const Mesh& mesh, const DofMap& dm,
                                     const ModelParameters& params,
                                     double n_cells);

// Consistent-coupling penalty (kappa/2) sum_i ||(P^i - grad u^i) x n||^2 over
// the domain boundary, 3-point edge quadrature. Requires a micro field.
void add_coupling_penalty(Eigen::SparseMatrix<double>& K, const Mesh& mesh,
                          const DofMap& dm, double kappa);

// Default penalty weight 1e4 * (stiffest shear-like modulus of the model) / l.
double default_kappa(const ModelParameters& params, double l);

// Affine constraint per DOF: value = coef * value(master) + offset.
struct ConstraintEntry {
  enum Kind { Free, Fixed, Slaved };
  Kind kind = Free;
  int master = -1;
  double coef = 0.0;
  double offset = 0.0;
};

struct ConstraintSet {
  std::vector<ConstraintEntry> entries;  // size n_dofs

  int n_free() const;
};

// u fixed on every boundary node to the mode displacement; micro-field DOFs
// free (consistent coupling is handled by the penalty).
ConstraintSet dirichlet_mode_constraints(const Mesh& mesh, const DofMap& dm,
                                         const DeformationMode& mode);

// Fluctuation periodicity u(x+) = u(x-) + eps_bar*(x+ - x-) on opposite faces;
// corner slaves fold into fixed values through the pinned master corner.
ConstraintSet periodic_constraints(const Mesh& mesh, const DofMap& dm,
                                   const PeriodicPairs& pairs,
                                   const Eigen::Matrix2d& mean_strain);

enum class BcKind { DirichletMode, Periodic };

struct SolveResult {
  Eigen::VectorXd d;
  double energy = 0.0;  // density quadrature, excludes the penalty term
};

// One factorization per (mesh, params, bc structure); each mode solve is a
// back-substitution with a new constraint offset vector.
class BvpSolver {
 public:
  // kappa < 0 selects default_kappa; kappa = 0 disables the penalty.
  BvpSolver(const Mesh& mesh, const ModelParameters& params, double n_cells,
            BcKind bc, double kappa = -1.0);

  // Periodic runs require an affine mode; the mean strain is sym B.
  SolveResult solve(const DeformationMode& mode) const;

  // Stored energy by quadrature of the model density over the solution.
  double total_energy(const Eigen::VectorXd& d) const;
  // Quadrature of an arbitrary integrand of the local state over the solution
  // fields (partial-energy integrals, diagnostics).
  double integrate(const Eigen::VectorXd& d,
                   const std::function<double(const FieldState&)>& fn) const;
  // 1/2 d^T K d including the penalty (oracle cross-check).
  double bilinear_energy(const Eigen::VectorXd& d) const;

  const DofMap& dof_map() const { return dm_; }
  const Eigen::SparseMatrix<double>& stiffness() const { return K_; }

 private:
  Eigen::VectorXd offsets_for(const DeformationMode& mode) const;

  const Mesh& mesh_;
  ModelParameters params_;
  double n_cells_;
  BcKind bc_;
  DofMap dm_;
  Eigen::SparseMatrix<double> K_;
  ConstraintSet structure_;  // offsets ignored; per-mode offsets recomputed
  PeriodicPairs pairs_;
  std::vector<int> free_index_;  // dof -> free column or -1
  Eigen::SparseMatrix<double> T_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

// Direct dense SPD solve used by small utility paths and tests; checks the
// residual ||Kd - f|| <= 1e-10 ||f|| (1e-12 absolute when f = 0).
Eigen::VectorXd solve_spd(const Eigen::MatrixXd& K, const Eigen::VectorXd& f);

}  // namespace rmfit
