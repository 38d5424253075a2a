#pragma once

#include <Eigen/Dense>
#include <functional>

namespace rmfit {

// Nodal quadratic Lagrange bases on the reference elements.
// Q2: [-1,1]^2, node order corners BL,BR,TR,TL; mids bottom,right,top,left; center.
// T2: unit triangle (0,0),(1,0),(0,1), order v0,v1,v2,m01,m12,m20.
void q2_basis(const Eigen::Vector2d& xi, Eigen::Matrix<double, 9, 1>& vals,
              Eigen::Matrix<double, 9, 2>& grads);
void t2_basis(const Eigen::Vector2d& xi, Eigen::Matrix<double, 6, 1>& vals,
              Eigen::Matrix<double, 6, 2>& grads);

// First-kind Nedelec space of order 2 on [-1,1]^2: Q_{1,2} x Q_{2,1}, dim 12.
// DOFs: per edge (bottom,right,top,left; canonical directions +x,+y,+x,+y)
// two tangential moments against {1, s}; four interior moments of v1 against
// {1, x} and v2 against {1, y}. Basis functions are dual to these functionals.
// Function order: e0m0,e0m1, e1m0,e1m1, e2m0,e2m1, e3m0,e3m1, i0..i3.
class NedelecBasis {
 public:
  static const NedelecBasis& instance();

  // Reference values (12 x 2) and scalar curls v2,x - v1,y (12 x 1) at xi.
  void eval(const Eigen::Vector2d& xi, Eigen::Matrix<double, 12, 2>& vals,
            Eigen::Matrix<double, 12, 1>& curls) const;

  // Functionals applied to an arbitrary reference vector field, i.e. the
  // interpolation DOFs of that field.
  Eigen::Matrix<double, 12, 1> interpolate(
      const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& field) const;

 private:
  NedelecBasis();
  Eigen::Matrix<double, 12, 12> coeff_;  // row i: monomial coefficients of basis i
};

// Quadrature rules (points in reference coords, weights include reference measure).
struct QuadratureRule {
  Eigen::Matrix<double, Eigen::Dynamic, 2> points;
  Eigen::VectorXd weights;
};
const QuadratureRule& quad_rule_q33();   // 3x3 Gauss on [-1,1]^2
const QuadratureRule& quad_rule_t6();    // 6-point degree-4 rule on unit triangle
const QuadratureRule& quad_rule_edge3(); // 3-point Gauss on [-1,1]

}  // namespace rmfit
