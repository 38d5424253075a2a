#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rmfit/fem.hpp"
#include "rmfit/loading.hpp"
#include "rmfit/materials.hpp"
#include "rmfit/mesh.hpp"
#include "rmfit/models.hpp"

namespace rmfit {

enum class RefBc { Affine, Periodic, Quadratic };

// Heterogeneous reference energies, one entry per (mode, size), mode-major:
// entries[i * sizes.size() + k] belongs to (modes[i], sizes[k]).
struct ReferenceDataset {
  std::vector<DeformationMode> modes;
  std::vector<int> sizes;
  RefBc bc = RefBc::Affine;
  int refine = 1;
  UnitCellGeometry geom;
  std::vector<double> energies;  // kN*mm
  std::uint64_t provenance = 0;

  int n_modes() const { return static_cast<int>(modes.size()); }
  int n_sizes() const { return static_cast<int>(sizes.size()); }
  double energy(int mode, int size_idx) const {
    return energies[static_cast<size_t>(mode) * sizes.size() + size_idx];
  }
};

// FNV-1a hash over geometry, modes, sizes, bc and refine; keys the cache and
// stamps every output file.
std::uint64_t reference_provenance(const UnitCellGeometry& geom,
                                   const std::vector<DeformationMode>& modes,
                                   const std::vector<int>& sizes, RefBc bc,
                                   int refine);

// Solves the i_max * n_max heterogeneous BVPs. If cache_dir is nonempty the
// dataset is loaded from / stored to <cache_dir>/ref-<hash>.txt.
ReferenceDataset build_reference(const UnitCellGeometry& geom,
                                 const std::vector<DeformationMode>& modes,
                                 const std::vector<int>& sizes, RefBc bc,
                                 int refine, int threads = 0,
                                 const std::string& cache_dir = "");

struct FitIterate {
  Eigen::VectorXd theta;
  double r2 = 0.0;
  double beta = 0.0;
  double beta_max = 0.0;
  std::vector<int> excluded;  // parameter indices clamped by the matrix bound
};

struct FitReport {
  std::vector<std::string> param_names;
  std::vector<FitIterate> trace;
  Eigen::VectorXd final_theta;
  double final_r2 = 0.0;
  bool converged = false;
  bool stalled = false;
  std::string reason;
};

// --- Algorithm 1: linear-elastic homogenization ------------------------------
// Exact least squares on the three cubic moduli; the reference must consist of
// affine modes (both for affine-Dirichlet and periodic data the equivalent
// homogeneous response is the exact constant-strain energy). Throws on a
// rank-deficient mode set (condition number > 1e12).
std::pair<CubicModuli, FitReport> fit_linear(const ReferenceDataset& ref);

// --- Generalized-continuum machinery ----------------------------------------

// Maps a flat parameter vector theta to ModelParameters and describes the
// admissible set by linear lower-bound constraints w . theta > bound.
struct ModelFamily {
  std::vector<std::string> names;
  std::function<ModelParameters(const Eigen::VectorXd&)> pack;
  std::vector<std::pair<Eigen::VectorXd, double>> lower_bounds;
  // indices of (mu_micro, mu*_micro, lambda_micro) inside theta, or -1 when
  // the model does not expose them (used by the matrix-bound projection)
  int i_mu = -1, i_mu_star = -1, i_lambda = -1;
};

// macro is the frozen tensor; mu_eq = equivalent_shear(macro) converts the
// optimized mu*Lc^2 into the reported Lc.
ModelFamily rmm_family(const CubicModuli& macro);
ModelFamily cosserat_family(const CubicModuli& macro);
ModelFamily micromorphic_simple_family(const CubicModuli& macro);
ModelFamily micromorphic_iso_family(const CubicModuli& macro, double mu_lc_sq);

// Homogeneous-model energies for the reference's (mode, size) grid; one sparse
// factorization per (parameter set, size), back-substitution per mode.
class ModelEvaluator {
 public:
  ModelEvaluator(const ReferenceDataset& ref, int n_cells_hint = 12,
                 double kappa = -1.0, int threads = 0);

  // Energies ordered like ReferenceDataset::energies.
  Eigen::VectorXd energies(const ModelParameters& params) const;
  // Batch evaluation; (set, size) tasks run in parallel, reduction is
  // index-ordered and deterministic.
  std::vector<Eigen::VectorXd> energies_batch(
      const std::vector<ModelParameters>& sets) const;

  const Mesh& mesh() const { return mesh_; }

 private:
  const ReferenceDataset& ref_;
  Mesh mesh_;
  double kappa_;
  int threads_;
};

struct FitOptions {
  bool constrained = false;
  IsotropicLame matrix{51.08, 26.32};  // bound for the constrained mode
  double tol = 1e-6;
  int max_iterations = 100;
  double fd_eps_rel = 1e-6;
  int n_cells_hint = 12;  // homogeneous mesh resolution
  double kappa = -1.0;
  int threads = 0;
};

// Forward-difference partials of the model energies with a full re-solve per
// perturbed parameter; D has one row per (mode, size) and one column per
// active (non-excluded) parameter. Also returns the base energies b.
Eigen::MatrixXd energy_partials(const ModelFamily& family,
                                const Eigen::VectorXd& theta,
                                const ModelEvaluator& eval,
                                const std::vector<int>& excluded,
                                double fd_eps_rel, Eigen::VectorXd* base);

// Least-squares direction (D^T D)^-1 D^T (a - b) via QR; throws on rank
// deficiency (condition estimate > 1e12).
Eigen::VectorXd solve_direction(const Eigen::MatrixXd& D,
                                const Eigen::VectorXd& a,
                                const Eigen::VectorXd& b);

// Largest admissible step: min(1, 0.99 * earliest lower-bound crossing).
double beta_max(const ModelFamily& family, const Eigen::VectorXd& theta,
                const Eigen::VectorXd& dir);

// Grid line search over beta in {1/512,1/256,1/128,1/64,1/32,1/8,1/4,1/2,1}
// * beta_max plus beta = 0; returns (beta, r2) of the minimizer.
std::pair<double, double> line_search(const ModelFamily& family,
                                      const Eigen::VectorXd& theta,
                                      const Eigen::VectorXd& dir, double bmax,
                                      const ModelEvaluator& eval,
                                      const Eigen::VectorXd& a);

// Clamps violated matrix bounds (mu* and mu to mu_matrix, the sum bound via
// lambda). Returns the clamped theta and the indices that were clamped.
std::pair<Eigen::VectorXd, std::vector<int>> project_matrix_bound(
    const ModelFamily& family, const Eigen::VectorXd& theta,
    const IsotropicLame& matrix);

FitReport fit_iterative(const ModelFamily& family, const ReferenceDataset& ref,
                        const Eigen::VectorXd& init, const FitOptions& options);

}  // namespace rmfit
