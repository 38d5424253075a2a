#include <doctest.h>

#include <random>

#include "rmfit/fem.hpp"
#include "rmfit/loading.hpp"

using namespace rmfit;

namespace {

const CubicModuli kMicro{26.32, 26.32, 51.08};
const CubicModuli kMacro{5.9, 0.627, 1.748};

double exact_affine_energy(const CubicModuli& c, const Eigen::Matrix2d& B,
                           double volume) {
  return volume * le_energy_terms(B).dot(Eigen::Vector3d(c.mu, c.mu_star, c.lambda));
}

}  // namespace

TEST_CASE("dof map sizes") {
  const Mesh mesh = build_homogeneous_mesh(2, ElementFamily::Q2NQ2, 1, 1.0);
  const DofMap none = DofMap::build(mesh, PDisc::None);
  CHECK(none.n_dofs == 2 * 25);
  const DofMap ned = DofMap::build(mesh, PDisc::Nedelec);
  CHECK(ned.p_row_stride == 2 * 12 + 4 * 4);
  CHECK(ned.n_dofs == 50 + 2 * ned.p_row_stride);
  const DofMap lag = DofMap::build(mesh, PDisc::LagrangeVec);
  CHECK(lag.n_dofs == 50 + 4 * 25);
  const DofMap skw = DofMap::build(mesh, PDisc::LagrangeSkew);
  CHECK(skw.n_dofs == 50 + 25);
}

TEST_CASE("stiffness is symmetric for every discretization") {
  const Mesh mesh = build_homogeneous_mesh(2, ElementFamily::Q2NQ2, 1, 1.0);
  const std::vector<ModelParameters> sets = {
      ModelParameters{LinearElasticParams{kMacro}},
      ModelParameters{RmmParams{kMicro, kMacro, 2.0}},
      ModelParameters{CosseratParams{kMacro, 1.5, 2.0}},
      ModelParameters{MicromorphicSimpleParams{kMicro, kMacro, 1.5, 2.0}},
  };
  for (const auto& params : sets) {
    const DofMap dm = DofMap::build(mesh, p_discretization(params));
    Eigen::SparseMatrix<double> K = assemble(mesh, dm, params, 1.0);
    CHECK((Eigen::MatrixXd(K) - Eigen::MatrixXd(K).transpose()).norm() <
          1e-10 * Eigen::MatrixXd(K).norm());
    if (dm.disc != PDisc::None) {
      add_coupling_penalty(K, mesh, dm, 100.0);
      CHECK((Eigen::MatrixXd(K) - Eigen::MatrixXd(K).transpose()).norm() <
            1e-10 * Eigen::MatrixXd(K).norm());
    }
  }
}

TEST_CASE("linear elastic patch test: affine Dirichlet data is exact") {
  const Mesh mesh = build_homogeneous_mesh(3, ElementFamily::Q2, 1, 1.0);
  const BvpSolver solver(mesh, ModelParameters{LinearElasticParams{kMacro}}, 1.0,
                         BcKind::DirichletMode);
  for (const auto& mode : canonical_affine_modes()) {
    const SolveResult r = solver.solve(mode);
    CHECK(r.energy ==
          doctest::Approx(exact_affine_energy(kMacro, mode.B, 1.0)).epsilon(1e-10));
    // interior solution is the affine field itself
    for (int n = 0; n < mesh.n_nodes(); ++n) {
      const Eigen::Vector2d u = eval_mode(mode, mesh.nodes[n]);
      CHECK(std::abs(r.d(2 * n) - u(0)) < 1e-11);
      CHECK(std::abs(r.d(2 * n + 1) - u(1)) < 1e-11);
    }
  }
}

TEST_CASE("rigid rotation stores no energy") {
  const Mesh mesh = build_homogeneous_mesh(3, ElementFamily::Q2, 1, 1.0);
  const BvpSolver solver(mesh, ModelParameters{LinearElasticParams{kMacro}}, 1.0,
                         BcKind::DirichletMode);
  DeformationMode rot;
  rot.B << 0.0, -0.05, 0.05, 0.0;
  CHECK(std::abs(solver.solve(rot).energy) < 1e-12);
}

TEST_CASE("periodic fluctuations vanish on a homogeneous cell") {
  const Mesh mesh = build_homogeneous_mesh(3, ElementFamily::Q2, 1, 1.0);
  const BvpSolver solver(mesh, ModelParameters{LinearElasticParams{kMacro}}, 1.0,
                         BcKind::Periodic);
  for (const auto& mode : canonical_affine_modes()) {
    const SolveResult r = solver.solve(mode);
    const Eigen::Matrix2d eps = mode_mean_strain(mode);
    CHECK(r.energy ==
          doctest::Approx(exact_affine_energy(kMacro, eps, 1.0)).epsilon(1e-10));
    for (int n = 0; n < mesh.n_nodes(); ++n) {
      const Eigen::Vector2d u = eps * mesh.nodes[n];
      CHECK(std::abs(r.d(2 * n) - u(0)) < 1e-11);
      CHECK(std::abs(r.d(2 * n + 1) - u(1)) < 1e-11);
    }
  }
}

TEST_CASE("density quadrature matches the bilinear form without penalty") {
  const Mesh mesh = build_homogeneous_mesh(2, ElementFamily::Q2, 1, 1.0);
  const BvpSolver solver(mesh, ModelParameters{LinearElasticParams{kMacro}}, 1.0,
                         BcKind::DirichletMode);
  DeformationMode mode;
  mode.B << 0.02, 0.01, -0.01, 0.03;
  mode.C << 0.01, 0.0, -0.02, 0.0, 0.015, 0.01;
  const SolveResult r = solver.solve(mode);
  CHECK(r.energy == doctest::Approx(solver.bilinear_energy(r.d)).epsilon(1e-11));
  CHECK(r.energy > 0.0);
}

TEST_CASE("micro field is released by the penalty limit") {
  // with kappa = 0 the micro field decouples from the boundary data; the
  // relaxed model then underestimates the penalized energy
  const Mesh mesh = build_homogeneous_mesh(4, ElementFamily::Q2NQ2, 1, 1.0);
  const ModelParameters params{RmmParams{kMicro, kMacro, 1.5}};
  DeformationMode mode;
  mode.B << 0.0, 0.03, 0.03, 0.0;
  const double e_free =
      BvpSolver(mesh, params, 1.0, BcKind::DirichletMode, 0.0).solve(mode).energy;
  const double e_tied =
      BvpSolver(mesh, params, 1.0, BcKind::DirichletMode).solve(mode).energy;
  CHECK(e_free > 0.0);
  CHECK(e_tied >= e_free - 1e-12);
}

TEST_CASE("default penalty weight tracks the stiffest modulus") {
  const ModelParameters rmm{RmmParams{kMicro, kMacro, 1.5}};
  CHECK(default_kappa(rmm, 1.0) ==
        doctest::Approx(1e4 * (26.32 + 51.08)).epsilon(1e-12));
  CHECK(default_kappa(rmm, 2.0) ==
        doctest::Approx(0.5e4 * (26.32 + 51.08)).epsilon(1e-12));
  const ModelParameters cos{CosseratParams{kMacro, 452.6, 1.0}};
  CHECK(default_kappa(cos, 1.0) == doctest::Approx(1e4 * 452.6).epsilon(1e-12));
}

TEST_CASE("generalized models solve and stay below their penalty energy") {
  const Mesh mesh = build_homogeneous_mesh(4, ElementFamily::Q2NQ2, 1, 1.0);
  DeformationMode mode;
  mode.B << 0.02, 0.01, 0.0, -0.01;
  mode.C << 0.0, 0.01, 0.0, 0.01, 0.0, 0.0;
  const std::vector<ModelParameters> sets = {
      ModelParameters{RmmParams{kMicro, kMacro, 1.5}},
      ModelParameters{CosseratParams{kMacro, 1.5, 1.5}},
      ModelParameters{MicromorphicSimpleParams{kMicro, kMacro, 1.5, 1.5}},
      ModelParameters{MicromorphicIsoParams{kMicro, kMacro, 1.5, 1.0, 1.0, 1.0, 1.5}},
  };
  for (const auto& params : sets) {
    const BvpSolver solver(mesh, params, 1.0, BcKind::DirichletMode);
    const SolveResult r = solver.solve(mode);
    CHECK(r.energy > 0.0);
    // reported energy excludes the penalty, so it can only fall below 1/2 d'Kd
    CHECK(r.energy <= solver.bilinear_energy(r.d) + 1e-10);
  }
}

TEST_CASE("manufactured dense SPD solve") {
  std::mt19937_64 eng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 24;
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = g(eng);
  const Eigen::MatrixXd K =
      M.transpose() * M + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) f(i) = g(eng);
  const Eigen::VectorXd d = solve_spd(K, f);
  CHECK((K * d - f).norm() < 1e-9 * f.norm());
  CHECK((d - K.fullPivLu().solve(f)).norm() < 1e-8);
  CHECK_THROWS(solve_spd(-K, f));
}
