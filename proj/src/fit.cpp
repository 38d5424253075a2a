#include "rmfit/fit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <mutex>
#include <thread>

#include "rmfit/io.hpp"

namespace rmfit {

namespace {

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Index-ordered parallel map: tasks claim indices from an atomic counter;
// results land in caller-provided slots, so reductions are deterministic.
void parallel_for(int n_tasks, int threads,
                  const std::function<void(int)>& task) {
  threads = std::min(resolve_threads(threads), std::max(n_tasks, 1));
  if (threads <= 1) {
    for (int i = 0; i < n_tasks; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::uint64_t reference_provenance(const UnitCellGeometry& geom,
                                   const std::vector<DeformationMode>& modes,
                                   const std::vector<int>& sizes, RefBc bc,
                                   int refine) {
  std::uint64_t h = fnv1a("ref-v1", 6);
  for (double v : {geom.l, geom.l1_factor, geom.l2_factor, geom.matrix.lambda,
                   geom.matrix.mu, geom.inclusion.lambda, geom.inclusion.mu})
    h = fnv1a_double(v, h);
  for (const auto& m : modes) {
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) h = fnv1a_double(m.B(r, c), h);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 3; ++c) h = fnv1a_double(m.C(r, c), h);
  }
  for (int n : sizes) h = fnv1a_int(n, h);
  h = fnv1a_int(static_cast<int>(bc), h);
  h = fnv1a_int(refine, h);
  return h;
}

ReferenceDataset build_reference(const UnitCellGeometry& geom,
                                 const std::vector<DeformationMode>& modes,
                                 const std::vector<int>& sizes, RefBc bc,
                                 int refine, int threads,
                                 const std::string& cache_dir) {
  if (modes.empty() || sizes.empty())
    throw std::invalid_argument("build_reference: modes and sizes required");
  if (bc == RefBc::Periodic)
    for (const auto& m : modes)
      if (!m.is_affine(1e-14))
        throw std::invalid_argument(
            "build_reference: periodic bc requires affine modes");

  const std::uint64_t hash =
      reference_provenance(geom, modes, sizes, bc, refine);
  std::string cache_path;
  if (!cache_dir.empty()) {
    char name[64];
    std::snprintf(name, sizeof name, "ref-%016llx.txt",
                  static_cast<unsigned long long>(hash));
    cache_path = cache_dir + "/" + name;
    if (std::filesystem::exists(cache_path)) {
      ReferenceDataset cached = load_reference(cache_path);
      if (cached.provenance == hash) return cached;
    }
  }

  ReferenceDataset ref;
  ref.modes = modes;
  ref.sizes = sizes;
  ref.bc = bc;
  ref.refine = refine;
  ref.geom = geom;
  ref.provenance = hash;
  ref.energies.assign(modes.size() * sizes.size(), 0.0);

  const BcKind bckind =
      bc == RefBc::Periodic ? BcKind::Periodic : BcKind::DirichletMode;
  parallel_for(static_cast<int>(sizes.size()), threads, [&](int k) {
    const Mesh mesh = build_heterogeneous_mesh(geom, sizes[k], refine);
    BvpSolver solver(mesh, ModelParameters{HeterogeneousParams{geom}}, sizes[k],
                     bckind);
    for (size_t i = 0; i < modes.size(); ++i) {
      try {
        ref.energies[i * sizes.size() + k] = solver.solve(modes[i]).energy;
      } catch (const std::exception& e) {
        throw std::runtime_error("build_reference: mode " + modes[i].label +
                                 " n=" + std::to_string(sizes[k]) + ": " +
                                 e.what());
      }
    }
  });

  if (!cache_path.empty()) {
    std::filesystem::create_directories(cache_dir);
    save_reference(ref, cache_path);
  }
  return ref;
}

std::pair<CubicModuli, FitReport> fit_linear(const ReferenceDataset& ref) {
  for (const auto& m : ref.modes)
    if (!m.is_affine(1e-14))
      throw std::invalid_argument(
          "fit_linear: affine modes required (homogeneous response is "
          "constant-strain only for affine data)");

  // For affine data the equivalent homogeneous energy is exactly
  // V * (mu*t1 + mu*_t2 + lambda*t3); identical for every size.
  const double volume = ref.geom.l * ref.geom.l;
  const int rows = ref.n_modes() * ref.n_sizes();
  Eigen::MatrixXd D(rows, 3);
  Eigen::VectorXd a(rows);
  for (int i = 0; i < ref.n_modes(); ++i) {
    const Eigen::Vector3d t = volume * le_energy_terms(ref.modes[i].B);
    for (int k = 0; k < ref.n_sizes(); ++k) {
      D.row(i * ref.n_sizes() + k) = t.transpose();
      a(i * ref.n_sizes() + k) = ref.energy(i, k);
    }
  }

  FitReport report;
  report.param_names = {"mu", "mu_star", "lambda"};
  Eigen::Vector3d c(1.0, 1.0, 1.0);  // initial guess; exact after one update
  auto r2_of = [&](const Eigen::Vector3d& cc) {
    return (a - D * cc).squaredNorm();
  };
  double r2 = r2_of(c);
  report.trace.push_back({c, r2, 0.0, 0.0, {}});
  for (int iter = 0; iter < 5; ++iter) {
    const Eigen::VectorXd delta = solve_direction(D, a, D * c);
    const Eigen::Vector3d c_new = c + delta;
    const double r2_new = r2_of(c_new);
    report.trace.push_back({c_new, r2_new, 1.0, 1.0, {}});
    const bool done = delta.norm() <= 1e-12 * std::max(c_new.norm(), 1.0);
    c = c_new;
    r2 = r2_new;
    if (done) break;
  }
  report.final_theta = c;
  report.final_r2 = r2;
  report.converged = true;
  report.reason = "exact least squares";
  return {{c(0), c(1), c(2)}, report};
}

// --- model families ----------------------------------------------------------

namespace {

Eigen::VectorXd unit(int dim, int k, double v = 1.0) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
  e(k) = v;
  return e;
}

void add_micro_bounds(ModelFamily& f, const CubicModuli& macro, int dim) {
  f.lower_bounds.emplace_back(unit(dim, 0), macro.mu);
  f.lower_bounds.emplace_back(unit(dim, 1), macro.mu_star);
  Eigen::VectorXd sum = unit(dim, 0);
  sum(2) = 1.0;
  f.lower_bounds.emplace_back(sum, macro.mu + macro.lambda);
  f.i_mu = 0;
  f.i_mu_star = 1;
  f.i_lambda = 2;
}

}  // namespace

ModelFamily rmm_family(const CubicModuli& macro) {
  ModelFamily f;
  f.names = {"mu_micro", "mu_star_micro", "lambda_micro", "mu_lc_sq"};
  f.pack = [macro](const Eigen::VectorXd& t) {
    return ModelParameters{RmmParams{{t(0), t(1), t(2)}, macro, t(3)}};
  };
  add_micro_bounds(f, macro, 4);
  f.lower_bounds.emplace_back(unit(4, 3), 0.0);
  return f;
}

ModelFamily cosserat_family(const CubicModuli& macro) {
  ModelFamily f;
  f.names = {"mu_c", "mu_lc_sq"};
  f.pack = [macro](const Eigen::VectorXd& t) {
    return ModelParameters{CosseratParams{macro, t(0), t(1)}};
  };
  f.lower_bounds.emplace_back(unit(2, 0), 0.0);
  f.lower_bounds.emplace_back(unit(2, 1), 0.0);
  return f;
}

ModelFamily micromorphic_simple_family(const CubicModuli& macro) {
  ModelFamily f;
  f.names = {"mu_micro", "mu_star_micro", "lambda_micro", "mu_c", "mu_lc_sq"};
  f.pack = [macro](const Eigen::VectorXd& t) {
    return ModelParameters{
        MicromorphicSimpleParams{{t(0), t(1), t(2)}, macro, t(3), t(4)}};
  };
  add_micro_bounds(f, macro, 5);
  f.lower_bounds.emplace_back(unit(5, 3), 0.0);
  f.lower_bounds.emplace_back(unit(5, 4), 0.0);
  return f;
}

ModelFamily micromorphic_iso_family(const CubicModuli& macro, double mu_lc_sq) {
  ModelFamily f;
  f.names = {"mu_micro", "mu_star_micro", "lambda_micro",
             "mu_c",     "alpha1",        "alpha2",
             "alpha3"};
  f.pack = [macro, mu_lc_sq](const Eigen::VectorXd& t) {
    return ModelParameters{MicromorphicIsoParams{
        {t(0), t(1), t(2)}, macro, t(3), t(4), t(5), t(6), mu_lc_sq}};
  };
  add_micro_bounds(f, macro, 7);
  for (int k = 3; k < 7; ++k) f.lower_bounds.emplace_back(unit(7, k), 0.0);
  return f;
}

// --- evaluator ---------------------------------------------------------------

ModelEvaluator::ModelEvaluator(const ReferenceDataset& ref, int n_cells_hint,
                               double kappa, int threads)
    : ref_(ref), kappa_(kappa), threads_(threads) {
  mesh_ = build_homogeneous_mesh(n_cells_hint, ElementFamily::Q2NQ2, 1,
                                 ref.geom.l);
}

Eigen::VectorXd ModelEvaluator::energies(const ModelParameters& params) const {
  return energies_batch({params})[0];
}

std::vector<Eigen::VectorXd> ModelEvaluator::energies_batch(
    const std::vector<ModelParameters>& sets) const {
  const int n_sets = static_cast<int>(sets.size());
  const int n_sizes = ref_.n_sizes();
  const BcKind bc =
      ref_.bc == RefBc::Periodic ? BcKind::Periodic : BcKind::DirichletMode;
  std::vector<Eigen::VectorXd> out(
      n_sets, Eigen::VectorXd::Zero(ref_.n_modes() * n_sizes));
  parallel_for(n_sets * n_sizes, threads_, [&](int task) {
    const int s = task / n_sizes;
    const int k = task % n_sizes;
    BvpSolver solver(mesh_, sets[s], ref_.sizes[k], bc, kappa_);
    for (int i = 0; i < ref_.n_modes(); ++i)
      out[s](i * n_sizes + k) = solver.solve(ref_.modes[i]).energy;
  });
  return out;
}

// --- iterative fit building blocks ------------------------------------------

Eigen::MatrixXd energy_partials(const ModelFamily& family,
                                const Eigen::VectorXd& theta,
                                const ModelEvaluator& eval,
                                const std::vector<int>& excluded,
                                double fd_eps_rel, Eigen::VectorXd* base) {
  const int dim = static_cast<int>(theta.size());
  std::vector<int> active;
  for (int k = 0; k < dim; ++k)
    if (std::find(excluded.begin(), excluded.end(), k) == excluded.end())
      active.push_back(k);

  std::vector<ModelParameters> sets;
  sets.push_back(family.pack(theta));
  std::vector<double> eps(active.size());
  for (size_t j = 0; j < active.size(); ++j) {
    const int k = active[j];
    double e = fd_eps_rel * std::max(std::abs(theta(k)), 1.0);
    Eigen::VectorXd tp = theta;
    int tries = 0;
    for (;; ++tries) {
      tp(k) = theta(k) + e;
      if (is_admissible(family.pack(tp))) break;
      if (tries > 40)
        throw std::runtime_error(
            "energy_partials: no admissible perturbation for " +
            family.names[k]);
      e *= 0.5;
    }
    eps[j] = e;
    sets.push_back(family.pack(tp));
  }

  const auto energies = eval.energies_batch(sets);
  if (base) *base = energies[0];
  Eigen::MatrixXd D(energies[0].size(), active.size());
  for (size_t j = 0; j < active.size(); ++j)
    D.col(j) = (energies[j + 1] - energies[0]) / eps[j];
  return D;
}

Eigen::VectorXd solve_direction(const Eigen::MatrixXd& D,
                                const Eigen::VectorXd& a,
                                const Eigen::VectorXd& b) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
  const Eigen::VectorXd rdiag = qr.matrixR().diagonal().cwiseAbs();
  const double cond =
      rdiag.maxCoeff() / std::max(rdiag.minCoeff(), 1e-300);
  if (qr.rank() < D.cols() || cond > 1e12)
    throw std::runtime_error(
        "solve_direction: rank-deficient sensitivity matrix (mode set "
        "energetically degenerate), condition estimate " +
        std::to_string(cond));
  return qr.solve(a - b);
}

double beta_max(const ModelFamily& family, const Eigen::VectorXd& theta,
                const Eigen::VectorXd& dir) {
  double bmax = 1.0;
  for (const auto& [w, bound] : family.lower_bounds) {
    const double g = w.dot(dir);
    if (g >= 0.0) continue;
    const double slack = w.dot(theta) - bound;  // > 0 by strict interiority
    bmax = std::min(bmax, 0.99 * slack / (-g));
  }
  return bmax;
}

std::pair<double, double> line_search(const ModelFamily& family,
                                      const Eigen::VectorXd& theta,
                                      const Eigen::VectorXd& dir, double bmax,
                                      const ModelEvaluator& eval,
                                      const Eigen::VectorXd& a) {
  // grid exactly as printed (1/16 is absent), plus the beta = 0 guard
  static const double kGrid[] = {1.0 / 512, 1.0 / 256, 1.0 / 128,
                                 1.0 / 64,  1.0 / 32,  1.0 / 8,
                                 1.0 / 4,   1.0 / 2,   1.0};
  std::vector<double> betas{0.0};
  std::vector<ModelParameters> sets{family.pack(theta)};
  for (double g : kGrid) {
    const double b = g * bmax;
    const ModelParameters p = family.pack(theta + b * dir);
    if (!is_admissible(p)) continue;  // cannot happen with a correct bmax
    betas.push_back(b);
    sets.push_back(p);
  }
  const auto energies = eval.energies_batch(sets);
  double best_beta = 0.0, best_r2 = (a - energies[0]).squaredNorm();
  for (size_t j = 1; j < betas.size(); ++j) {
    const double r2 = (a - energies[j]).squaredNorm();
    if (r2 < best_r2) {
      best_r2 = r2;
      best_beta = betas[j];
    }
  }
  return {best_beta, best_r2};
}

std::pair<Eigen::VectorXd, std::vector<int>> project_matrix_bound(
    const ModelFamily& family, const Eigen::VectorXd& theta,
    const IsotropicLame& matrix) {
  Eigen::VectorXd t = theta;
  std::vector<int> clamped;
  if (family.i_mu < 0) return {t, clamped};
  if (t(family.i_mu_star) > matrix.mu) {
    t(family.i_mu_star) = matrix.mu;
    clamped.push_back(family.i_mu_star);
  }
  if (t(family.i_mu) > matrix.mu) {
    t(family.i_mu) = matrix.mu;
    clamped.push_back(family.i_mu);
  }
  const double sum_bound = matrix.mu + matrix.lambda;
  if (t(family.i_mu) + t(family.i_lambda) > sum_bound) {
    t(family.i_lambda) = sum_bound - t(family.i_mu);
    clamped.push_back(family.i_lambda);
  }
  return {t, clamped};
}

FitReport fit_iterative(const ModelFamily& family, const ReferenceDataset& ref,
                        const Eigen::VectorXd& init, const FitOptions& options) {
  check_admissible(family.pack(init));
  const ModelEvaluator eval(ref, options.n_cells_hint, options.kappa,
                            options.threads);
  const Eigen::VectorXd a =
      Eigen::Map<const Eigen::VectorXd>(ref.energies.data(),
                                        ref.energies.size());

  FitReport report;
  report.param_names = family.names;
  Eigen::VectorXd theta = init;
  double r2 = (a - eval.energies(family.pack(theta))).squaredNorm();
  report.trace.push_back({theta, r2, 0.0, 0.0, {}});

  int stall_count = 0;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const double r2_old = r2;
    const Eigen::VectorXd theta_start = theta;
    std::vector<int> excluded;
    double beta = 0.0, bmax = 0.0;
    for (int attempt = 0;; ++attempt) {
      Eigen::VectorXd b;
      const Eigen::MatrixXd D =
          energy_partials(family, theta, eval, excluded, options.fd_eps_rel, &b);
      const Eigen::VectorXd dir_active = solve_direction(D, a, b);
      Eigen::VectorXd dir = Eigen::VectorXd::Zero(theta.size());
      int j = 0;
      for (int k = 0; k < theta.size(); ++k)
        if (std::find(excluded.begin(), excluded.end(), k) == excluded.end())
          dir(k) = dir_active(j++);
      bmax = beta_max(family, theta, dir);
      const auto [beta_star, r2_star] = line_search(family, theta, dir, bmax,
                                                    eval, a);
      Eigen::VectorXd cand = theta + beta_star * dir;
      beta = beta_star;
      r2 = r2_star;
      if (options.constrained) {
        auto [clamped, newly] =
            project_matrix_bound(family, cand, options.matrix);
        if (!newly.empty() && attempt < 3) {
          // repeat this iteration from the projected point, excluding the
          // clamped parameters; they re-enter next iteration
          theta = clamped;
          r2 = (a - eval.energies(family.pack(theta))).squaredNorm();
          for (int k : newly) excluded.push_back(k);
          continue;
        }
        cand = clamped;
        if (!newly.empty())
          r2 = (a - eval.energies(family.pack(cand))).squaredNorm();
      }
      theta = cand;
      break;
    }
    if (r2 > r2_old) {
      // monotonicity guard: keep the previous iterate
      theta = theta_start;
      r2 = r2_old;
      beta = 0.0;
    }
    report.trace.push_back({theta, r2, beta, bmax, excluded});
    if (beta == 0.0) {
      if (++stall_count >= 2) {
        report.stalled = true;
        report.reason = "no acceptable step twice in a row";
        break;
      }
    } else {
      stall_count = 0;
    }
    if (r2_old > 0.0 && (r2_old - r2) / r2_old < options.tol) {
      report.converged = true;
      report.reason = "relative r2 decrease below tolerance";
      break;
    }
  }
  if (!report.converged && !report.stalled)
    report.reason = "iteration limit reached";
  report.final_theta = theta;
  report.final_r2 = r2;
  return report;
}

}  // namespace rmfit
