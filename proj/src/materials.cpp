#include "rmfit/materials.hpp"

#include <cmath>
#include <stdexcept>

namespace rmfit {

Eigen::Matrix3d voigt(const CubicModuli& c) {
  Eigen::Matrix3d m;
  m << 2.0 * c.mu + c.lambda, c.lambda, 0.0,
       c.lambda, 2.0 * c.mu + c.lambda, 0.0,
       0.0, 0.0, c.mu_star;
  return m;
}

CubicModuli reuss_ce(const CubicModuli& micro, const CubicModuli& macro) {
  const double s_mi = micro.lambda + micro.mu;
  const double s_ma = macro.lambda + macro.mu;
  if (!(micro.mu > macro.mu && micro.mu_star > macro.mu_star && s_mi > s_ma)) {
    throw std::invalid_argument(
        "reuss_ce: micro tensor must be strictly stiffer than macro in "
        "(mu, mu*, lambda+mu)");
  }
  CubicModuli ce;
  ce.mu = micro.mu * macro.mu / (micro.mu - macro.mu);
  ce.mu_star = micro.mu_star * macro.mu_star / (micro.mu_star - macro.mu_star);
  const double s_e = s_mi * s_ma / (s_mi - s_ma);
  ce.lambda = s_e - ce.mu;
  return ce;
}

double equivalent_shear(const CubicModuli& macro) {
  return std::pow(macro.mu * macro.mu *
                      macro.mu_star * macro.mu_star * macro.mu_star,
                  0.2);
}

std::vector<MatrixBound> matrix_bound_violations(const CubicModuli& micro,
                                                 const IsotropicLame& matrix) {
  std::vector<MatrixBound> out;
  if (micro.mu_star > matrix.mu) out.push_back(MatrixBound::MuStar);
  if (micro.mu > matrix.mu) out.push_back(MatrixBound::Mu);
  if (micro.mu + micro.lambda > matrix.mu + matrix.lambda)
    out.push_back(MatrixBound::MuPlusLambda);
  return out;
}

}  // namespace rmfit
