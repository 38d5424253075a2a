#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rmfit {

// Isotropic Lame pair, kN/mm^2.
struct IsotropicLame {
  double lambda = 0.0;
  double mu = 0.0;

  bool positive_definite() const { return mu > 0.0 && lambda + mu > 0.0; }
};

// Three-parameter planar cubic elasticity (mu, mu*, lambda), kN/mm^2.
// Voigt form:
//   [ 2mu+lambda   lambda      0    ]
//   [ lambda       2mu+lambda  0    ]
//   [ 0            0           mu*  ]
struct CubicModuli {
  double mu = 0.0;
  double mu_star = 0.0;
  double lambda = 0.0;

  bool positive_definite() const {
    return mu > 0.0 && mu_star > 0.0 && lambda + mu > 0.0;
  }

  static CubicModuli from_isotropic(const IsotropicLame& m) {
    return {m.mu, m.mu, m.lambda};
  }

  CubicModuli scaled(double s) const { return {s * mu, s * mu_star, s * lambda}; }
};

Eigen::Matrix3d voigt(const CubicModuli& c);

// Reuss-like relation: voigt(macro)^-1 = voigt(micro)^-1 + voigt(ce)^-1,
// componentwise in (mu, mu*, lambda+mu). Requires micro strictly stiffer
// than macro in all three components; throws std::invalid_argument otherwise.
CubicModuli reuss_ce(const CubicModuli& micro, const CubicModuli& macro);

// Isotropic equivalent shear modulus of a cubic tensor,
// mu = (mu^2 * mu*^3)^(1/5).
double equivalent_shear(const CubicModuli& macro);

enum class MatrixBound { MuStar, Mu, MuPlusLambda };

// Upper-bound ("stiffest response") constraints of the micro tensor against
// the homogeneous matrix material:
//   mu*_micro <= mu_matrix,  mu_micro <= mu_matrix,
//   mu_micro + lambda_micro <= mu_matrix + lambda_matrix.
// Equality counts as satisfied. Returns the violated subset.
std::vector<MatrixBound> matrix_bound_violations(const CubicModuli& micro,
                                                 const IsotropicLame& matrix);

}  // namespace rmfit
