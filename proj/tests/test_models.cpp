#include <doctest.h>

#include <random>

#include "rmfit/models.hpp"

using namespace rmfit;

namespace {

FieldState random_state(std::mt19937_64& eng) {
  std::normal_distribution<double> g(0.0, 1.0);
  FieldState s;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      s.grad_u(i, j) = g(eng);
      s.P(i, j) = g(eng);
    }
  s.curl_P << g(eng), g(eng);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) s.grad_P(i, j) = g(eng);
  return s;
}

StateVector pack(const FieldState& s) {
  StateVector v;
  v << s.grad_u(0, 0), s.grad_u(0, 1), s.grad_u(1, 0), s.grad_u(1, 1),
      s.P(0, 0), s.P(0, 1), s.P(1, 0), s.P(1, 1), s.curl_P(0), s.curl_P(1),
      s.grad_P(0, 0), s.grad_P(0, 1), s.grad_P(1, 0), s.grad_P(1, 1),
      s.grad_P(2, 0), s.grad_P(2, 1), s.grad_P(3, 0), s.grad_P(3, 1);
  return v;
}

const CubicModuli kMicro{26.32, 26.32, 51.08};
const CubicModuli kMacro{5.9, 0.627, 1.748};

}  // namespace

TEST_CASE("state vector packing round trip") {
  std::mt19937_64 eng(11);
  const FieldState s = random_state(eng);
  const FieldState r = state_from_vector(pack(s));
  CHECK((r.grad_u - s.grad_u).norm() < 1e-15);
  CHECK((r.P - s.P).norm() < 1e-15);
  CHECK((r.curl_P - s.curl_P).norm() < 1e-15);
  CHECK((r.grad_P - s.grad_P).norm() < 1e-15);
}

TEST_CASE("linear elastic terms and density") {
  Eigen::Matrix2d gu;
  gu << 0.2, 0.5, -0.1, 0.3;  // eps = [[0.2, 0.2], [0.2, 0.3]]
  const Eigen::Vector3d t = le_energy_terms(gu);
  CHECK(t(0) == doctest::Approx(0.04 + 0.09).epsilon(1e-13));
  CHECK(t(1) == doctest::Approx(2 * 0.04).epsilon(1e-13));
  CHECK(t(2) == doctest::Approx(0.5 * 0.25).epsilon(1e-13));
  const CubicModuli c{2.0, 3.0, 5.0};
  CHECK(le_density(c, gu) ==
        doctest::Approx(2.0 * t(0) + 3.0 * t(1) + 5.0 * t(2)).epsilon(1e-13));
  // pure rotation stores no energy
  Eigen::Matrix2d rot;
  rot << 0.0, -0.4, 0.4, 0.0;
  CHECK(le_density(c, rot) == doctest::Approx(0.0));
}

TEST_CASE("relaxed micromorphic density: P = grad u leaves the micro terms") {
  // with a symmetric P equal to grad u the gap vanishes and the micro terms
  // coincide with the linear-elastic density of the micro tensor
  std::mt19937_64 eng(12);
  FieldState s;
  Eigen::Matrix2d e;
  e << 0.1, 0.25, 0.25, -0.3;
  s.grad_u = e;
  s.P = e;
  const RmmParams p{kMicro, kMacro, 3.0};
  CHECK(rmm_density(p, s, 1.0) ==
        doctest::Approx(le_density(kMicro, e)).epsilon(1e-13));

  // adding curl contributes (mu Lc^2 / 2 n^2) |curl|^2
  s.curl_P << 0.4, -0.2;
  const double extra = 0.5 * 3.0 * s.curl_P.squaredNorm();
  CHECK(rmm_density(p, s, 1.0) ==
        doctest::Approx(le_density(kMicro, e) + extra).epsilon(1e-13));
  CHECK(rmm_density(p, s, 2.0) ==
        doctest::Approx(le_density(kMicro, e) + extra / 4.0).epsilon(1e-13));
}

TEST_CASE("relaxed micromorphic density: zero P leaves the meso terms") {
  FieldState s;
  s.grad_u << 0.2, 0.1, 0.1, -0.05;
  const RmmParams p{kMicro, kMacro, 3.0};
  const CubicModuli ce = reuss_ce(kMicro, kMacro);
  CHECK(rmm_density(p, s, 1.0) ==
        doctest::Approx(le_density(ce, s.grad_u)).epsilon(1e-12));
}

TEST_CASE("densities are nonnegative on random states") {
  std::mt19937_64 eng(13);
  const RmmParams rmm{kMicro, kMacro, 2.0};
  const CosseratParams cos{kMacro, 1.5, 2.0};
  const MicromorphicSimpleParams mms{kMicro, kMacro, 1.5, 2.0};
  const MicromorphicIsoParams mmi{kMicro, kMacro, 1.5, 0.8, 1.2, 0.5, 2.0};
  for (int k = 0; k < 50; ++k) {
    const FieldState s = random_state(eng);
    CHECK(rmm_density(rmm, s, 1.0) >= 0.0);
    CHECK(cosserat_density(cos, s, 1.0) >= 0.0);
    CHECK(micromorphic_simple_density(mms, s, 1.0) >= 0.0);
    CHECK(micromorphic_iso_density(mmi, s, 1.0) >= 0.0);
  }
}

TEST_CASE("quadratic form reproduces every density") {
  std::mt19937_64 eng(14);
  const std::vector<ModelParameters> sets = {
      ModelParameters{LinearElasticParams{kMacro}},
      ModelParameters{RmmParams{kMicro, kMacro, 2.0}},
      ModelParameters{CosseratParams{kMacro, 1.5, 2.0}},
      ModelParameters{MicromorphicSimpleParams{kMicro, kMacro, 1.5, 2.0}},
      ModelParameters{MicromorphicIsoParams{kMicro, kMacro, 1.5, 0.8, 1.2, 0.5, 2.0}},
  };
  for (const auto& params : sets) {
    for (double n : {1.0, 3.0}) {
      const StateMatrix A = quadratic_form(params, n);
      CHECK((A - A.transpose()).norm() < 1e-12);
      for (int k = 0; k < 10; ++k) {
        const FieldState s = random_state(eng);
        const StateVector v = pack(s);
        CHECK(0.5 * v.dot(A * v) ==
              doctest::Approx(model_density(params, s, n))
                  .epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("isotropic curvature orthogonal split") {
  // alpha1 = alpha2 = 1 and (2/9) alpha3 = 1/3 turn the split into the plain
  // squared norm of each derivative block
  std::mt19937_64 eng(15);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Matrix<double, 4, 2> gp;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) gp(i, j) = g(eng);
  double norms = 0.0;
  for (int j = 0; j < 2; ++j) {
    Eigen::Matrix2d m;
    m << gp(0, j), gp(1, j), gp(2, j), gp(3, j);
    norms += m.squaredNorm();
  }
  CHECK(micromorphic_iso_curvature(1.0, 1.0, 1.5, gp) ==
        doctest::Approx(norms).epsilon(1e-12));
}

TEST_CASE("admissibility of the parameter variants") {
  CHECK(is_admissible(ModelParameters{RmmParams{kMicro, kMacro, 2.0}}));
  // micro must be strictly stiffer than macro
  CHECK(!is_admissible(ModelParameters{RmmParams{kMacro, kMacro, 2.0}}));
  CHECK(!is_admissible(ModelParameters{RmmParams{kMicro, kMacro, 0.0}}));
  CHECK(!is_admissible(
      ModelParameters{RmmParams{{26.32, 0.627, 51.08}, kMacro, 2.0}}));
  CHECK_THROWS_AS(check_admissible(ModelParameters{RmmParams{kMacro, kMacro, 2.0}}),
                  std::invalid_argument);
  CHECK(is_admissible(ModelParameters{CosseratParams{kMacro, 1.0, 1.0}}));
  CHECK(!is_admissible(ModelParameters{CosseratParams{kMacro, 0.0, 1.0}}));
  CHECK(!is_admissible(
      ModelParameters{MicromorphicIsoParams{kMicro, kMacro, 1.0, -0.1, 1.0, 1.0, 2.0}}));
}
