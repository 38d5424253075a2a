#include <doctest.h>

#include <random>

#include "rmfit/fit.hpp"

using namespace rmfit;

namespace {

const CubicModuli kMacro{5.9, 0.627, 1.748};

// reference with synthetic homogeneous-equivalent energies of known moduli
ReferenceDataset synthetic_affine_reference(const CubicModuli& truth) {
  ReferenceDataset ref;
  ref.modes = canonical_affine_modes();
  ref.sizes = {1, 2};
  ref.bc = RefBc::Affine;
  const double volume = ref.geom.l * ref.geom.l;
  for (const auto& m : ref.modes) {
    const double e = volume * le_energy_terms(m.B).dot(Eigen::Vector3d(
                                  truth.mu, truth.mu_star, truth.lambda));
    for (size_t k = 0; k < ref.sizes.size(); ++k) ref.energies.push_back(e);
  }
  return ref;
}

}  // namespace

TEST_CASE("linear fit recovers synthetic moduli in one update") {
  const CubicModuli truth{6.251, 8.337, 4.379};
  const auto [c, rep] = fit_linear(synthetic_affine_reference(truth));
  CHECK(c.mu == doctest::Approx(truth.mu).epsilon(1e-10));
  CHECK(c.mu_star == doctest::Approx(truth.mu_star).epsilon(1e-10));
  CHECK(c.lambda == doctest::Approx(truth.lambda).epsilon(1e-10));
  REQUIRE(rep.trace.size() >= 2);
  CHECK(rep.trace[1].r2 <= 1e-18 * rep.trace[0].r2);
  CHECK(rep.converged);
}

TEST_CASE("linear fit rejects quadratic modes") {
  ReferenceDataset ref = synthetic_affine_reference({1.0, 1.0, 1.0});
  ref.modes[0].C(0, 0) = 0.01;
  CHECK_THROWS_AS(fit_linear(ref), std::invalid_argument);
}

TEST_CASE("least-squares direction solves a manufactured system") {
  std::mt19937_64 eng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd D(12, 4);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 4; ++j) D(i, j) = g(eng);
  Eigen::VectorXd x(4), b(12);
  for (int j = 0; j < 4; ++j) x(j) = g(eng);
  for (int i = 0; i < 12; ++i) b(i) = g(eng);
  const Eigen::VectorXd a = D * x + b;
  CHECK((solve_direction(D, a, b) - x).norm() < 1e-10);

  Eigen::MatrixXd Drank = D;
  Drank.col(3) = Drank.col(0);  // rank deficient
  CHECK_THROWS(solve_direction(Drank, a, b));
}

TEST_CASE("largest admissible step along a descent direction") {
  const ModelFamily family = rmm_family(kMacro);
  // bounds: t0 > 5.9, t1 > 0.627, t0 + t2 > 7.648, t3 > 0
  Eigen::VectorXd theta(4), dir(4);
  theta << 10.0, 1.0, 5.0, 1.0;

  dir << -10.0, 0.0, 0.0, 0.0;
  CHECK(beta_max(family, theta, dir) ==
        doctest::Approx(0.99 * 4.1 / 10.0).epsilon(1e-12));

  dir << 0.0, 0.0, 0.0, -4.0;
  CHECK(beta_max(family, theta, dir) == doctest::Approx(0.99 / 4.0).epsilon(1e-12));

  dir << 1.0, 1.0, 1.0, 1.0;  // moving away from every bound
  CHECK(beta_max(family, theta, dir) == doctest::Approx(1.0));
}

TEST_CASE("matrix-bound projection clamps the violating moduli") {
  const ModelFamily family = rmm_family(kMacro);
  const IsotropicLame matrix{51.08, 26.32};

  Eigen::VectorXd inside(4);
  inside << 10.0, 20.0, 30.0, 1.0;
  auto [t0, c0] = project_matrix_bound(family, inside, matrix);
  CHECK(c0.empty());
  CHECK((t0 - inside).norm() == 0.0);

  Eigen::VectorXd outside(4);
  outside << 30.0, 40.0, 60.0, 1.0;
  auto [t1, c1] = project_matrix_bound(family, outside, matrix);
  CHECK(t1(0) == doctest::Approx(26.32));
  CHECK(t1(1) == doctest::Approx(26.32));
  CHECK(t1(0) + t1(2) == doctest::Approx(26.32 + 51.08));
  CHECK(t1(3) == doctest::Approx(1.0));
  CHECK(c1.size() == 3);
}

TEST_CASE("line search never increases the residual") {
  ReferenceDataset ref;
  ref.modes = {canonical_affine_modes()[0], canonical_affine_modes()[2]};
  ref.sizes = {1};
  ref.bc = RefBc::Quadratic;
  const ModelFamily family = rmm_family(kMacro);
  const ModelEvaluator eval(ref, 4);

  Eigen::VectorXd theta(4), target(4);
  theta << 26.32, 26.32, 51.08, 1.5;
  target << 12.0, 5.0, 20.0, 0.8;
  const Eigen::VectorXd a = eval.energies(family.pack(target));
  ref.energies.assign(a.data(), a.data() + a.size());

  const Eigen::VectorXd dir = target - theta;
  const double bmax = beta_max(family, theta, dir);
  const auto [beta, r2] = line_search(family, theta, dir, bmax, eval, a);
  const double r2_start = (a - eval.energies(family.pack(theta))).squaredNorm();
  CHECK(r2 <= r2_start);
  CHECK(beta > 0.0);  // stepping toward the generating parameters must help
  CHECK(beta <= bmax);
}

TEST_CASE("energy partials respect exclusions and step admissibility") {
  ReferenceDataset ref;
  ref.modes = {canonical_affine_modes()[0]};
  ref.sizes = {1};
  ref.bc = RefBc::Quadratic;
  const ModelFamily family = rmm_family(kMacro);
  const ModelEvaluator eval(ref, 4);

  Eigen::VectorXd theta(4);
  theta << 26.32, 26.32, 51.08, 1.5;
  Eigen::VectorXd base;
  const Eigen::MatrixXd D = energy_partials(family, theta, eval, {1, 3}, 1e-6, &base);
  CHECK(D.rows() == 1);
  CHECK(D.cols() == 2);  // parameters 0 and 2 remain active
  CHECK(base.size() == 1);
  CHECK(base(0) > 0.0);
  CHECK(D.allFinite());
}

TEST_CASE("provenance hash separates datasets") {
  const UnitCellGeometry geom;
  const auto modes = canonical_affine_modes();
  const auto h1 = reference_provenance(geom, modes, {1, 2}, RefBc::Affine, 1);
  const auto h2 = reference_provenance(geom, modes, {1, 2}, RefBc::Affine, 1);
  CHECK(h1 == h2);
  CHECK(h1 != reference_provenance(geom, modes, {1, 3}, RefBc::Affine, 1));
  CHECK(h1 != reference_provenance(geom, modes, {1, 2}, RefBc::Periodic, 1));
  CHECK(h1 != reference_provenance(geom, modes, {1, 2}, RefBc::Affine, 2));
  UnitCellGeometry other;
  other.l2_factor = 0.35;
  CHECK(h1 != reference_provenance(other, modes, {1, 2}, RefBc::Affine, 1));
}
