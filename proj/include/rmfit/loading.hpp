#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace rmfit {

// Quadratic Dirichlet deformation mode: u(x) = B*x + C*[x^2, xy, y^2].
// B dimensionless, C in 1/mm.
struct DeformationMode {
  Eigen::Matrix2d B = Eigen::Matrix2d::Zero();
  Eigen::Matrix<double, 2, 3> C = Eigen::Matrix<double, 2, 3>::Zero();
  std::string label;

  bool is_affine(double tol = 0.0) const { return C.lpNorm<Eigen::Infinity>() <= tol; }
};

Eigen::Vector2d eval_mode(const DeformationMode& mode, const Eigen::Vector2d& x);

// Mean strain of an affine mode (sym B).
Eigen::Matrix2d mode_mean_strain(const DeformationMode& mode);

// count modes with all B (row-major, 4 draws) then C (row-major, 6 draws)
// entries i.i.d. uniform on [-0.05, 0.05]. Deterministic: std::mt19937_64
// seeded with `seed`; each raw 64-bit draw maps to [0,1) via the top 53 bits,
// u = (eng() >> 11) * 2^-53, then affinely to the sampling box.
std::vector<DeformationMode> random_modes(int count, std::uint64_t seed);

// The four affine mean-strain modes used for the homogenization fits
// (modes labelled eps1..eps4; B = eps_bar, C = 0).
std::vector<DeformationMode> canonical_affine_modes();

// The four validation modes (0.05x, 0), (0.05y, 0), (0.05xy, 0), (0, 0.05x^2).
std::vector<DeformationMode> validation_modes();

// Plain-text round trip: one mode per record (label, B row-major, C row-major).
void save_modes(const std::vector<DeformationMode>& modes,
                const std::string& path);
std::vector<DeformationMode> load_modes(const std::string& path);

}  // namespace rmfit
