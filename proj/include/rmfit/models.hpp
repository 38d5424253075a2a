#pragma once

#include <Eigen/Dense>
#include <variant>

#include "rmfit/materials.hpp"
#include "rmfit/mesh.hpp"

namespace rmfit {

// Local kinematic state at a quadrature point. grad_P rows follow the P
// component order (P11, P12, P21, P22); columns are d/dx1, d/dx2. curl_P holds
// the two out-of-plane components (Curl P)_13 = P12,1 - P11,2 and
// (Curl P)_23 = P22,1 - P21,2. Discretizations fill only the slots they carry
// (curl for edge elements, grad_P for Lagrange fields); the remaining slots
// stay zero and the density reads whichever its curvature needs.
struct FieldState {
  Eigen::Matrix2d grad_u = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d P = Eigen::Matrix2d::Zero();
  Eigen::Vector2d curl_P = Eigen::Vector2d::Zero();
  Eigen::Matrix<double, 4, 2> grad_P = Eigen::Matrix<double, 4, 2>::Zero();
};

// Flat 18-component packing of FieldState used for quadratic forms:
// [0..3] u1,1 u1,2 u2,1 u2,2; [4..7] P11 P12 P21 P22; [8..9] curl_P;
// [10..17] grad_P row-major.
constexpr int kStateDim = 18;
using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;

FieldState state_from_vector(const StateVector& s);

// --- Model parameter variants -----------------------------------------------

struct LinearElasticParams {
  CubicModuli c;
};

struct HeterogeneousParams {
  UnitCellGeometry geom;
};

// Relaxed micromorphic: micro tensor plus the optimized product mu*Lc^2 [kN].
// C_e is always derived from (micro, macro) through the Reuss relation.
struct RmmParams {
  CubicModuli micro;
  CubicModuli macro;  // frozen during fits
  double mu_lc_sq = 0.0;
};

struct CosseratParams {
  CubicModuli macro;  // frozen
  double mu_c = 0.0;
  double mu_lc_sq = 0.0;
};

struct MicromorphicSimpleParams {
  CubicModuli micro;
  CubicModuli macro;  // frozen
  double mu_c = 0.0;
  double mu_lc_sq = 0.0;
};

// Full-gradient micromorphic with the 3-parameter isotropic curvature;
// mu_lc_sq is frozen (Lc = 1 mm) and only the alphas scale the curvature.
struct MicromorphicIsoParams {
  CubicModuli micro;
  CubicModuli macro;  // frozen
  double mu_c = 0.0;
  double alpha1 = 1.0, alpha2 = 1.0, alpha3 = 1.0;
  double mu_lc_sq = 0.0;
};

using ModelParameters =
    std::variant<LinearElasticParams, HeterogeneousParams, RmmParams,
                 CosseratParams, MicromorphicSimpleParams,
                 MicromorphicIsoParams>;

// Discretization of the micro field implied by the model.
enum class PDisc { None, Nedelec, LagrangeVec, LagrangeSkew };
PDisc p_discretization(const ModelParameters& params);

// Throws std::invalid_argument if params violate the model's admissible set
// (micro strictly stiffer than macro, mu_lc_sq > 0, mu_c > 0 where required,
// alphas >= 0).
void check_admissible(const ModelParameters& params);
bool is_admissible(const ModelParameters& params);

// --- Energy densities (per volume, kN/mm^2; the 1/2 convention is uniform) --

// Parameter-free integrands of the linear-elastic density
// W = mu*t1 + mu_star*t2 + lambda*t3 with eps = sym grad_u:
// t1 = eps11^2 + eps22^2, t2 = 2 eps12^2, t3 = (eps11+eps22)^2 / 2.
Eigen::Vector3d le_energy_terms(const Eigen::Matrix2d& grad_u);

double le_density(const CubicModuli& c, const Eigen::Matrix2d& grad_u);

double rmm_density(const RmmParams& p, const FieldState& s, double n_cells);
double cosserat_density(const CosseratParams& p, const FieldState& s,
                        double n_cells);
double micromorphic_simple_density(const MicromorphicSimpleParams& p,
                                   const FieldState& s, double n_cells);

// The bare isotropic curvature sum over derivative directions i = 1,2:
// alpha1*||dev sym P,i||^2 + alpha2*||skew P,i||^2 + (2/9) alpha3 tr^2(P,i),
// with the 2x2 blocks embedded in 3x3 (zero third row/column).
double micromorphic_iso_curvature(double alpha1, double alpha2, double alpha3,
                                  const Eigen::Matrix<double, 4, 2>& grad_P);
double micromorphic_iso_density(const MicromorphicIsoParams& p,
                                const FieldState& s, double n_cells);

// Generic dispatch. For HeterogeneousParams the material must be resolved per
// element, so a Lame pair is passed explicitly by the caller; this overload
// rejects it.
double model_density(const ModelParameters& params, const FieldState& s,
                     double n_cells);

// 18x18 symmetric matrix A with model_density = (1/2) s^T A s, recovered from
// the density by polarization. Single source of truth for assembly.
StateMatrix quadratic_form(const ModelParameters& params, double n_cells);

}  // namespace rmfit
