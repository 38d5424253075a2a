#include <doctest.h>

#include <random>

#include "rmfit/basis.hpp"

using namespace rmfit;

namespace {

Eigen::Vector2d random_point(std::mt19937_64& eng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(eng), u(eng)};
}

}  // namespace

TEST_CASE("quadratic Lagrange bases: partition of unity") {
  std::mt19937_64 eng(1);
  Eigen::Matrix<double, 9, 1> v9;
  Eigen::Matrix<double, 9, 2> g9;
  Eigen::Matrix<double, 6, 1> v6;
  Eigen::Matrix<double, 6, 2> g6;
  for (int k = 0; k < 20; ++k) {
    q2_basis(random_point(eng, -1.0, 1.0), v9, g9);
    CHECK(v9.sum() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(g9.colwise().sum().norm() < 1e-12);

    const Eigen::Vector2d p = random_point(eng, 0.0, 0.5);  // inside triangle
    t2_basis(p, v6, g6);
    CHECK(v6.sum() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(g6.colwise().sum().norm() < 1e-12);
  }
}

TEST_CASE("Q2 basis is nodal in the documented node order") {
  const Eigen::Vector2d nodes[9] = {{-1, -1}, {1, -1}, {1, 1},  {-1, 1}, {0, -1},
                                    {1, 0},   {0, 1},  {-1, 0}, {0, 0}};
  Eigen::Matrix<double, 9, 1> v;
  Eigen::Matrix<double, 9, 2> g;
  for (int j = 0; j < 9; ++j) {
    q2_basis(nodes[j], v, g);
    for (int i = 0; i < 9; ++i)
      CHECK(v(i) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-13));
  }
}

TEST_CASE("edge basis functionals are dual to the basis functions") {
  const auto& ned = NedelecBasis::instance();
  std::mt19937_64 eng(2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Matrix<double, 12, 1> c;
  for (int i = 0; i < 12; ++i) c(i) = gauss(eng);

  auto field = [&](const Eigen::Vector2d& xi) -> Eigen::Vector2d {
    Eigen::Matrix<double, 12, 2> vals;
    Eigen::Matrix<double, 12, 1> curls;
    ned.eval(xi, vals, curls);
    return vals.transpose() * c;
  };
  const Eigen::Matrix<double, 12, 1> dofs = ned.interpolate(field);
  CHECK((dofs - c).norm() < 1e-11);
}

TEST_CASE("edge basis reproduces constants and gradient fields curl-free") {
  const auto& ned = NedelecBasis::instance();

  auto interpolant = [&](const Eigen::Matrix<double, 12, 1>& dofs,
                         const Eigen::Vector2d& xi, double& curl) {
    Eigen::Matrix<double, 12, 2> vals;
    Eigen::Matrix<double, 12, 1> curls;
    ned.eval(xi, vals, curls);
    curl = curls.dot(dofs);
    return Eigen::Vector2d(vals.transpose() * dofs);
  };

  // constant field
  const Eigen::Vector2d a(0.3, -0.7);
  const auto cd = ned.interpolate([&](const Eigen::Vector2d&) { return a; });
  std::mt19937_64 eng(3);
  for (int k = 0; k < 10; ++k) {
    double curl;
    const Eigen::Vector2d v = interpolant(cd, random_point(eng, -1.0, 1.0), curl);
    CHECK((v - a).norm() < 1e-12);
    CHECK(std::abs(curl) < 1e-12);
  }

  // gradient of a quadratic scalar: contained in the space, hence reproduced
  // exactly with zero curl
  auto grad_q = [](const Eigen::Vector2d& x) -> Eigen::Vector2d {
    return {0.4 + 0.9 * x.y() + 2.0 * 0.6 * x.x(),
            -0.2 + 0.9 * x.x() + 2.0 * 1.1 * x.y()};
  };
  const auto gd = ned.interpolate(grad_q);
  for (int k = 0; k < 10; ++k) {
    const Eigen::Vector2d xi = random_point(eng, -1.0, 1.0);
    double curl;
    const Eigen::Vector2d v = interpolant(gd, xi, curl);
    CHECK((v - grad_q(xi)).norm() < 1e-12);
    CHECK(std::abs(curl) < 1e-12);
  }
}

TEST_CASE("quadrature rules integrate their design space") {
  const auto& q = quad_rule_q33();
  const auto& t = quad_rule_t6();
  const auto& e = quad_rule_edge3();
  CHECK(q.weights.sum() == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(t.weights.sum() == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(e.weights.sum() == doctest::Approx(2.0).epsilon(1e-13));

  // 3x3 Gauss: exact through degree 5 per direction
  double s = 0.0;
  for (int k = 0; k < q.points.rows(); ++k)
    s += q.weights(k) * std::pow(q.points(k, 0), 4) * std::pow(q.points(k, 1), 2);
  CHECK(s == doctest::Approx((2.0 / 5.0) * (2.0 / 3.0)).epsilon(1e-13));

  // degree-4 triangle rule: int x^2 y^2 over the unit triangle = 1/180
  s = 0.0;
  for (int k = 0; k < t.points.rows(); ++k)
    s += t.weights(k) * std::pow(t.points(k, 0), 2) * std::pow(t.points(k, 1), 2);
  CHECK(s == doctest::Approx(1.0 / 180.0).epsilon(1e-12));

  // 3-point Gauss on [-1,1]: exact for x^4
  s = 0.0;
  for (int k = 0; k < e.points.rows(); ++k)
    s += e.weights(k) * std::pow(e.points(k, 0), 4);
  CHECK(s == doctest::Approx(2.0 / 5.0).epsilon(1e-13));
}
