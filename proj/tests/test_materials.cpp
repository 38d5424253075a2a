#include <doctest.h>

#include "rmfit/materials.hpp"

using namespace rmfit;

TEST_CASE("voigt matrix layout") {
  const CubicModuli c{2.0, 3.0, 5.0};
  const Eigen::Matrix3d V = voigt(c);
  CHECK(V(0, 0) == doctest::Approx(9.0));
  CHECK(V(1, 1) == doctest::Approx(9.0));
  CHECK(V(0, 1) == doctest::Approx(5.0));
  CHECK(V(1, 0) == doctest::Approx(5.0));
  CHECK(V(2, 2) == doctest::Approx(3.0));
  CHECK(V(0, 2) == 0.0);
  CHECK(V(2, 1) == 0.0);
}

TEST_CASE("reuss relation matches the Voigt-matrix inverse identity") {
  // independent oracle: C_e = (C_macro^-1 - C_micro^-1)^-1 in Voigt form
  const CubicModuli micro{10.55, 26.32, 8.22};
  const CubicModuli macro{5.9, 0.627, 1.748};
  const CubicModuli ce = reuss_ce(micro, macro);

  const Eigen::Matrix3d oracle =
      (voigt(macro).inverse() - voigt(micro).inverse()).inverse();
  const Eigen::Matrix3d got = voigt(ce);
  CHECK((got - oracle).norm() < 1e-10);

  // componentwise values through the scalar harmonic-difference formulas
  CHECK(ce.mu == doctest::Approx(10.55 * 5.9 / (10.55 - 5.9)).epsilon(1e-12));
  CHECK(ce.mu_star ==
        doctest::Approx(26.32 * 0.627 / (26.32 - 0.627)).epsilon(1e-12));
  const double s_mi = 10.55 + 8.22, s_ma = 5.9 + 1.748;
  const double s_e = s_mi * s_ma / (s_mi - s_ma);
  CHECK(ce.lambda + ce.mu == doctest::Approx(s_e).epsilon(1e-12));
  CHECK(ce.lambda < 0.0);  // admissible even when lambda_e is negative
}

TEST_CASE("reuss relation rejects a micro tensor not stiffer than macro") {
  const CubicModuli macro{5.9, 0.627, 1.748};
  CHECK_THROWS_AS(reuss_ce(CubicModuli{5.9, 26.32, 8.22}, macro),
                  std::invalid_argument);
  CHECK_THROWS_AS(reuss_ce(CubicModuli{10.55, 0.5, 8.22}, macro),
                  std::invalid_argument);
  CHECK_THROWS_AS(reuss_ce(CubicModuli{10.55, 26.32, -4.8}, macro),
                  std::invalid_argument);
}

TEST_CASE("equivalent shear modulus") {
  const CubicModuli c{5.9, 0.627, 1.748};
  CHECK(equivalent_shear(c) ==
        doctest::Approx(std::pow(5.9 * 5.9 * std::pow(0.627, 3), 0.2))
            .epsilon(1e-12));
  CHECK(equivalent_shear(c) == doctest::Approx(1.537).epsilon(2e-3));
}

TEST_CASE("matrix bound violations") {
  const IsotropicLame matrix{51.08, 26.32};
  CHECK(matrix_bound_violations({26.32, 26.32, 51.08}, matrix).empty());
  CHECK(matrix_bound_violations({10.0, 20.0, 30.0}, matrix).empty());

  auto v = matrix_bound_violations({30.0, 20.0, 30.0}, matrix);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == MatrixBound::Mu);

  v = matrix_bound_violations({10.0, 30.0, 30.0}, matrix);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == MatrixBound::MuStar);

  v = matrix_bound_violations({26.0, 20.0, 60.0}, matrix);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == MatrixBound::MuPlusLambda);
}
