#include "rmfit/fem.hpp"

#include <cmath>
#include <stdexcept>

#include "rmfit/basis.hpp"

namespace rmfit {

DofMap DofMap::build(const Mesh& mesh, PDisc disc) {
  DofMap dm;
  dm.disc = disc;
  dm.n_nodes = mesh.n_nodes();
  dm.n_edges = static_cast<int>(mesh.edges.size());
  dm.n_elems = mesh.n_elements();
  dm.p_offset = 2 * dm.n_nodes;
  switch (disc) {
    case PDisc::None:
      dm.n_dofs = dm.p_offset;
      break;
    case PDisc::Nedelec:
      if (dm.n_edges == 0)
        throw std::invalid_argument("DofMap: Nedelec needs a mesh with oriented edges");
      dm.p_row_stride = 2 * dm.n_edges + 4 * dm.n_elems;
      dm.n_dofs = dm.p_offset + 2 * dm.p_row_stride;
      break;
    case PDisc::LagrangeVec:
      dm.n_dofs = dm.p_offset + 4 * dm.n_nodes;
      break;
    case PDisc::LagrangeSkew:
      dm.n_dofs = dm.p_offset + dm.n_nodes;
      break;
  }
  return dm;
}

ElementContext::ElementContext(const Mesh& mesh, const DofMap& dm, int elem)
    : mesh_(mesh), dm_(dm), elem_(elem) {
  const auto& conn = mesh.elements[elem];
  const int nen = mesh.nodes_per_element();
  // All meshes here are affine (straight triangles / rectangles).
  if (mesh.family == ElementFamily::T2) {
    jac_.col(0) = mesh.nodes[conn[1]] - mesh.nodes[conn[0]];
    jac_.col(1) = mesh.nodes[conn[2]] - mesh.nodes[conn[0]];
  } else {
    jac_.col(0) = 0.5 * (mesh.nodes[conn[1]] - mesh.nodes[conn[0]]);
    jac_.col(1) = 0.5 * (mesh.nodes[conn[3]] - mesh.nodes[conn[0]]);
  }
  detj_ = jac_.determinant();
  if (!(detj_ > 0.0))
    throw std::runtime_error("ElementContext: nonpositive Jacobian");
  jac_inv_ = jac_.inverse();

  for (int k = 0; k < nen; ++k) {
    dofs_.push_back(dm.u_dof(conn[k], 0));
    dofs_.push_back(dm.u_dof(conn[k], 1));
  }
  switch (dm.disc) {
    case PDisc::None:
      break;
    case PDisc::Nedelec:
      for (int r = 0; r < 2; ++r) {
        for (int le = 0; le < 4; ++le)
          for (int m = 0; m < 2; ++m)
            dofs_.push_back(dm.p_edge_dof(r, mesh.elem_edges[elem][le], m));
        for (int k = 0; k < 4; ++k)
          dofs_.push_back(dm.p_interior_dof(r, elem, k));
      }
      break;
    case PDisc::LagrangeVec:
      for (int k = 0; k < nen; ++k)
        for (int c = 0; c < 4; ++c) dofs_.push_back(dm.p_node_dof(conn[k], c));
      break;
    case PDisc::LagrangeSkew:
      for (int k = 0; k < nen; ++k) dofs_.push_back(dm.a_dof(conn[k]));
      break;
  }
}

void ElementContext::eval(const Eigen::Vector2d& xi, Eigen::MatrixXd& B,
                          double& detj) const {
  const int nen = mesh_.nodes_per_element();
  B.setZero(kStateDim, n_local());
  detj = detj_;

  Eigen::Matrix<double, 9, 1> vals9;
  Eigen::Matrix<double, 9, 2> grads9;
  Eigen::Matrix<double, 6, 1> vals6;
  Eigen::Matrix<double, 6, 2> grads6;
  Eigen::MatrixXd grads;  // nen x 2, physical
  if (mesh_.family == ElementFamily::T2) {
    t2_basis(xi, vals6, grads6);
    grads = grads6 * jac_inv_;
  } else {
    q2_basis(xi, vals9, grads9);
    grads = grads9 * jac_inv_;
  }
  auto val = [&](int k) {
    return mesh_.family == ElementFamily::T2 ? vals6(k) : vals9(k);
  };

  for (int k = 0; k < nen; ++k) {
    B(0, 2 * k) = grads(k, 0);      // u1,1
    B(1, 2 * k) = grads(k, 1);      // u1,2
    B(2, 2 * k + 1) = grads(k, 0);  // u2,1
    B(3, 2 * k + 1) = grads(k, 1);  // u2,2
  }

  const int p0 = 2 * nen;  // first micro-field column
  switch (dm_.disc) {
    case PDisc::None:
      break;
    case PDisc::Nedelec: {
      Eigen::Matrix<double, 12, 2> nv;
      Eigen::Matrix<double, 12, 1> nc;
      NedelecBasis::instance().eval(xi, nv, nc);
      const Eigen::Matrix2d jinv_t = jac_inv_.transpose();
      for (int r = 0; r < 2; ++r) {
        for (int j = 0; j < 12; ++j) {
          double sgn = 1.0;
          if (j < 8 && j % 2 == 0)  // moment-0 edge DOF flips with orientation
            sgn = mesh_.elem_edge_signs[elem_][j / 2];
          const Eigen::Vector2d w = sgn * (jinv_t * nv.row(j).transpose());
          const int col = p0 + 12 * r + j;
          B(4 + 2 * r, col) = w(0);
          B(5 + 2 * r, col) = w(1);
          B(8 + r, col) = sgn * nc(j) / detj_;
        }
      }
      break;
    }
    case PDisc::LagrangeVec:
      for (int k = 0; k < nen; ++k) {
        for (int c = 0; c < 4; ++c) {
          const int col = p0 + 4 * k + c;
          B(4 + c, col) = val(k);
          B(10 + 2 * c, col) = grads(k, 0);
          B(11 + 2 * c, col) = grads(k, 1);
        }
        // curls: (Curl P)_13 = P12,1 - P11,2 ; (Curl P)_23 = P22,1 - P21,2
        B(8, p0 + 4 * k + 1) += grads(k, 0);
        B(8, p0 + 4 * k + 0) -= grads(k, 1);
        B(9, p0 + 4 * k + 3) += grads(k, 0);
        B(9, p0 + 4 * k + 2) -= grads(k, 1);
      }
      break;
    case PDisc::LagrangeSkew:
      for (int k = 0; k < nen; ++k) {
        const int col = p0 + k;
        B(5, col) = val(k);    // P12 = A12
        B(6, col) = -val(k);   // P21 = -A12
        B(8, col) = grads(k, 0);
        B(9, col) = grads(k, 1);
        B(12, col) = grads(k, 0);   // P12,1
        B(13, col) = grads(k, 1);   // P12,2
        B(14, col) = -grads(k, 0);  // P21,1
        B(15, col) = -grads(k, 1);  // P21,2
      }
      break;
  }
}

namespace {

// Per-material quadratic forms; heterogeneous meshes pick by material tag.
struct FormTable {
  StateMatrix a[2];
  bool hetero = false;

  const StateMatrix& of(const Mesh& mesh, int e) const {
    return hetero ? a[mesh.material[e]] : a[0];
  }
};

FormTable build_forms(const ModelParameters& params, double n_cells) {
  FormTable t;
  if (const auto* het = std::get_if<HeterogeneousParams>(&params)) {
    het->geom.validate();
    t.hetero = true;
    t.a[0] = quadratic_form(
        ModelParameters{LinearElasticParams{CubicModuli::from_isotropic(het->geom.matrix)}},
        1.0);
    t.a[1] = quadratic_form(
        ModelParameters{LinearElasticParams{CubicModuli::from_isotropic(het->geom.inclusion)}},
        1.0);
  } else {
    t.a[0] = quadratic_form(params, n_cells);
  }
  return t;
}

const QuadratureRule& volume_rule(const Mesh& mesh) {
  return mesh.family == ElementFamily::T2 ? quad_rule_t6() : quad_rule_q33();
}

}  // namespace

Eigen::SparseMatrix<double> assemble(const Mesh& mesh, const DofMap& dm,
                                     const ModelParameters& params,
                                     double n_cells) {
  const FormTable forms = build_forms(params, n_cells);
  const QuadratureRule& rule = volume_rule(mesh);

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::MatrixXd B;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const ElementContext ctx(mesh, dm, e);
    const StateMatrix& A = forms.of(mesh, e);
    Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(ctx.n_local(), ctx.n_local());
    for (int q = 0; q < rule.points.rows(); ++q) {
      double detj;
      ctx.eval(rule.points.row(q), B, detj);
      Ke.noalias() += rule.weights(q) * detj * B.transpose() * A * B;
    }
    const auto& dofs = ctx.dofs();
    for (int i = 0; i < ctx.n_local(); ++i)
      for (int j = 0; j < ctx.n_local(); ++j)
        trips.emplace_back(dofs[i], dofs[j], Ke(i, j));
  }
  Eigen::SparseMatrix<double> K(dm.n_dofs, dm.n_dofs);
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

void add_coupling_penalty(Eigen::SparseMatrix<double>& K, const Mesh& mesh,
                          const DofMap& dm, double kappa) {
  if (dm.disc == PDisc::None)
    throw std::invalid_argument("add_coupling_penalty: model has no micro field");
  if (mesh.family == ElementFamily::T2)
    throw std::invalid_argument("add_coupling_penalty: quad meshes only");
  if (kappa == 0.0) return;

  // (face, element-grid traversal): reference edge curve and outward normal.
  struct Face {
    Eigen::Vector2d p0, dir, normal;
  };
  const Face faces[4] = {
      {{0.0, -1.0}, {1.0, 0.0}, {0.0, -1.0}},  // bottom
      {{1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}},    // right
      {{0.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}},    // top
      {{-1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}},  // left
  };
  const QuadratureRule& erule = quad_rule_edge3();

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::MatrixXd B;
  auto do_edge = [&](int e, const Face& face) {
    const ElementContext ctx(mesh, dm, e);
    Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(ctx.n_local(), ctx.n_local());
    const auto& conn = mesh.elements[e];
    // affine rectangle: physical edge length per unit reference parameter
    const Eigen::Matrix2d J =
        (Eigen::Matrix2d() << 0.5 * (mesh.nodes[conn[1]] - mesh.nodes[conn[0]]),
         0.5 * (mesh.nodes[conn[3]] - mesh.nodes[conn[0]]))
            .finished();
    const double measure = (J * face.dir).norm();
    const double n1 = face.normal.x(), n2 = face.normal.y();
    for (int q = 0; q < erule.points.rows(); ++q) {
      const double s = erule.points(q, 0);
      double detj;
      ctx.eval(face.p0 + s * face.dir, B, detj);
      const Eigen::RowVectorXd c1 =
          (B.row(4) - B.row(0)) * n2 - (B.row(5) - B.row(1)) * n1;
      const Eigen::RowVectorXd c2 =
          (B.row(6) - B.row(2)) * n2 - (B.row(7) - B.row(3)) * n1;
      Ke.noalias() += kappa * erule.weights(q) * measure *
                      (c1.transpose() * c1 + c2.transpose() * c2);
    }
    const auto& dofs = ctx.dofs();
    for (int i = 0; i < ctx.n_local(); ++i)
      for (int j = 0; j < ctx.n_local(); ++j)
        trips.emplace_back(dofs[i], dofs[j], Ke(i, j));
  };

  const int nx = mesh.nx, ny = mesh.ny;
  for (int cx = 0; cx < nx; ++cx) do_edge(cx, faces[0]);                  // bottom
  for (int cy = 0; cy < ny; ++cy) do_edge(cy * nx + (nx - 1), faces[1]);  // right
  for (int cx = 0; cx < nx; ++cx) do_edge((ny - 1) * nx + cx, faces[2]);  // top
  for (int cy = 0; cy < ny; ++cy) do_edge(cy * nx, faces[3]);             // left

  Eigen::SparseMatrix<double> P(dm.n_dofs, dm.n_dofs);
  P.setFromTriplets(trips.begin(), trips.end());
  K += P;
}

double default_kappa(const ModelParameters& params, double l) {
  struct V {
    double operator()(const LinearElasticParams&) const { return 0.0; }
    double operator()(const HeterogeneousParams&) const { return 0.0; }
    double operator()(const RmmParams& p) const { return scale(p.micro); }
    double operator()(const CosseratParams& p) const {
      return std::max(scale(p.macro), p.mu_c);
    }
    double operator()(const MicromorphicSimpleParams& p) const {
      return std::max(scale(p.micro), p.mu_c);
    }
    double operator()(const MicromorphicIsoParams& p) const {
      return std::max(scale(p.micro), p.mu_c);
    }
    static double scale(const CubicModuli& c) {
      return std::max({c.mu, c.mu_star, c.mu + c.lambda});
    }
  };
  const double s = std::visit(V{}, params);
  return 1e4 * s / l;
}

int ConstraintSet::n_free() const {
  int n = 0;
  for (const auto& e : entries)
    if (e.kind == ConstraintEntry::Free) ++n;
  return n;
}

ConstraintSet dirichlet_mode_constraints(const Mesh& mesh, const DofMap& dm,
                                         const DeformationMode& mode) {
  ConstraintSet cs;
  cs.entries.resize(dm.n_dofs);
  for (int n : mesh.boundary_nodes) {
    const Eigen::Vector2d u = eval_mode(mode, mesh.nodes[n]);
    for (int c = 0; c < 2; ++c) {
      auto& e = cs.entries[dm.u_dof(n, c)];
      e.kind = ConstraintEntry::Fixed;
      e.offset = u(c);
    }
  }
  return cs;
}

ConstraintSet periodic_constraints(const Mesh& mesh, const DofMap& dm,
                                   const PeriodicPairs& pairs,
                                   const Eigen::Matrix2d& mean_strain) {
  ConstraintSet cs;
  cs.entries.resize(dm.n_dofs);
  // pin the master corner to the affine value
  const Eigen::Vector2d u_pin = mean_strain * mesh.nodes[pairs.pin];
  for (int c = 0; c < 2; ++c) {
    auto& e = cs.entries[dm.u_dof(pairs.pin, c)];
    e.kind = ConstraintEntry::Fixed;
    e.offset = u_pin(c);
  }
  for (const auto& [m, s] : pairs.pairs) {
    const Eigen::Vector2d shift = mean_strain * (mesh.nodes[s] - mesh.nodes[m]);
    for (int c = 0; c < 2; ++c) {
      auto& e = cs.entries[dm.u_dof(s, c)];
      if (e.kind != ConstraintEntry::Free)
        throw std::runtime_error("periodic_constraints: conflicting constraint");
      const auto& me = cs.entries[dm.u_dof(m, c)];
      if (me.kind == ConstraintEntry::Fixed) {
        e.kind = ConstraintEntry::Fixed;  // fold depth-1 slaving into a fix
        e.offset = me.offset + shift(c);
      } else {
        e.kind = ConstraintEntry::Slaved;
        e.master = dm.u_dof(m, c);
        e.coef = 1.0;
        e.offset = shift(c);
      }
    }
  }
  return cs;
}

BvpSolver::BvpSolver(const Mesh& mesh, const ModelParameters& params,
                     double n_cells, BcKind bc, double kappa)
    : mesh_(mesh), params_(params), n_cells_(n_cells), bc_(bc) {
  check_admissible(params_);
  dm_ = DofMap::build(mesh, p_discretization(params_));
  K_ = assemble(mesh, dm_, params_, n_cells_);
  if (dm_.disc != PDisc::None) {
    const double k = kappa < 0.0 ? default_kappa(params_, mesh.l) : kappa;
    add_coupling_penalty(K_, mesh, dm_, k);
  }

  if (bc_ == BcKind::Periodic) {
    pairs_ = periodic_pairs(mesh);
    structure_ = periodic_constraints(mesh, dm_, pairs_, Eigen::Matrix2d::Zero());
  } else {
    structure_ = dirichlet_mode_constraints(mesh, dm_, DeformationMode{});
  }

  free_index_.assign(dm_.n_dofs, -1);
  int nf = 0;
  for (int i = 0; i < dm_.n_dofs; ++i)
    if (structure_.entries[i].kind == ConstraintEntry::Free) free_index_[i] = nf++;

  std::vector<Eigen::Triplet<double>> tt;
  for (int i = 0; i < dm_.n_dofs; ++i) {
    const auto& e = structure_.entries[i];
    if (e.kind == ConstraintEntry::Free) {
      tt.emplace_back(i, free_index_[i], 1.0);
    } else if (e.kind == ConstraintEntry::Slaved) {
      const int mf = free_index_[e.master];
      if (mf < 0)
        throw std::runtime_error("BvpSolver: slaved DOF has non-free master");
      tt.emplace_back(i, mf, e.coef);
    }
  }
  T_.resize(dm_.n_dofs, nf);
  T_.setFromTriplets(tt.begin(), tt.end());

  const Eigen::SparseMatrix<double> Kred = T_.transpose() * K_ * T_;
  ldlt_.compute(Kred);
  if (ldlt_.info() != Eigen::Success)
    throw std::runtime_error("BvpSolver: factorization failed (indefinite reduced system)");
}

Eigen::VectorXd BvpSolver::offsets_for(const DeformationMode& mode) const {
  ConstraintSet cs;
  if (bc_ == BcKind::Periodic) {
    if (!mode.is_affine(1e-14))
      throw std::invalid_argument("BvpSolver: periodic runs need an affine mode");
    cs = periodic_constraints(mesh_, dm_, pairs_, mode_mean_strain(mode));
  } else {
    cs = dirichlet_mode_constraints(mesh_, dm_, mode);
  }
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dm_.n_dofs);
  for (int i = 0; i < dm_.n_dofs; ++i)
    if (cs.entries[i].kind != ConstraintEntry::Free) g(i) = cs.entries[i].offset;
  return g;
}

SolveResult BvpSolver::solve(const DeformationMode& mode) const {
  const Eigen::VectorXd g = offsets_for(mode);
  const Eigen::VectorXd rhs = -(T_.transpose() * (K_ * g));
  const Eigen::VectorXd df = ldlt_.solve(rhs);
  const Eigen::VectorXd resid =
      T_.transpose() * (K_ * (T_ * df)) + T_.transpose() * (K_ * g);
  const double rnorm = resid.norm();
  const double fnorm = rhs.norm();
  if (rnorm > std::max(1e-10 * fnorm, 1e-12))
    throw std::runtime_error("BvpSolver: solve residual too large: " +
                             std::to_string(rnorm));
  SolveResult out;
  out.d = T_ * df + g;
  out.energy = total_energy(out.d);
  return out;
}

double BvpSolver::total_energy(const Eigen::VectorXd& d) const {
  const FormTable forms = build_forms(params_, n_cells_);
  const QuadratureRule& rule = volume_rule(mesh_);
  double energy = 0.0;
  Eigen::MatrixXd B;
  for (int e = 0; e < mesh_.n_elements(); ++e) {
    const ElementContext ctx(mesh_, dm_, e);
    const StateMatrix& A = forms.of(mesh_, e);
    Eigen::VectorXd dloc(ctx.n_local());
    for (int i = 0; i < ctx.n_local(); ++i) dloc(i) = d(ctx.dofs()[i]);
    for (int q = 0; q < rule.points.rows(); ++q) {
      double detj;
      ctx.eval(rule.points.row(q), B, detj);
      const Eigen::VectorXd s = B * dloc;
      energy += 0.5 * rule.weights(q) * detj * s.dot(A * s);
    }
  }
  return energy;
}

double BvpSolver::integrate(
    const Eigen::VectorXd& d,
    const std::function<double(const FieldState&)>& fn) const {
  const QuadratureRule& rule = volume_rule(mesh_);
  double sum = 0.0;
  Eigen::MatrixXd B;
  for (int e = 0; e < mesh_.n_elements(); ++e) {
    const ElementContext ctx(mesh_, dm_, e);
    Eigen::VectorXd dloc(ctx.n_local());
    for (int i = 0; i < ctx.n_local(); ++i) dloc(i) = d(ctx.dofs()[i]);
    for (int q = 0; q < rule.points.rows(); ++q) {
      double detj;
      ctx.eval(rule.points.row(q), B, detj);
      const StateVector s = B * dloc;
      sum += rule.weights(q) * detj * fn(state_from_vector(s));
    }
  }
  return sum;
}

double BvpSolver::bilinear_energy(const Eigen::VectorXd& d) const {
  return 0.5 * d.dot(K_ * d);
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& K, const Eigen::VectorXd& f) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    int bad = -1;
    const Eigen::VectorXd dvec = ldlt.vectorD();
    for (int i = 0; i < dvec.size(); ++i)
      if (!(dvec(i) > 0.0)) {
        bad = i;
        break;
      }
    throw std::runtime_error("solve_spd: matrix not positive definite (pivot " +
                             std::to_string(bad) + ")");
  }
  Eigen::VectorXd d = ldlt.solve(f);
  const double rnorm = (K * d - f).norm();
  const double fnorm = f.norm();
  if (rnorm > std::max(1e-10 * fnorm, 1e-12))
    throw std::runtime_error("solve_spd: residual too large");
  return d;
}

}  // namespace rmfit
