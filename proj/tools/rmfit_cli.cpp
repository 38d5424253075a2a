#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "rmfit/acceptance.hpp"
#include "rmfit/fit.hpp"
#include "rmfit/io.hpp"
#include "rmfit/loading.hpp"
#include "rmfit/materials.hpp"

using namespace rmfit;

namespace {

struct Common {
  std::string config;
  int threads = 0;

  UnitCellGeometry geometry() const {
    return config.empty() ? UnitCellGeometry{} : parse_config(config);
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "geometry config file (key=value)");
  app->add_option("--threads", c.threads, "worker threads (0 = hardware)");
}

std::vector<DeformationMode> make_modes(const std::string& kind, int count,
                                        std::uint64_t seed) {
  if (kind == "canonical") return canonical_affine_modes();
  if (kind == "validation") return validation_modes();
  if (kind == "random") return random_modes(count, seed);
  throw CLI::ValidationError("--mode-set must be canonical|validation|random");
}

CubicModuli homogenize_macro(const UnitCellGeometry& geom, RefBc bc, int refine,
                             int threads) {
  const ReferenceDataset ref =
      build_reference(geom, canonical_affine_modes(), {1}, bc, refine, threads);
  return fit_linear(ref).first;
}

ModelFamily make_family(const std::string& model, const CubicModuli& macro) {
  if (model == "rmm") return rmm_family(macro);
  if (model == "cosserat") return cosserat_family(macro);
  if (model == "mm-simple") return micromorphic_simple_family(macro);
  if (model == "mm-iso")
    return micromorphic_iso_family(macro, equivalent_shear(macro));
  throw CLI::ValidationError("--model must be rmm|cosserat|mm-simple|mm-iso");
}

Eigen::VectorXd default_init(const std::string& model,
                             const UnitCellGeometry& geom,
                             const CubicModuli& macro) {
  const CubicModuli m = CubicModuli::from_isotropic(geom.matrix);
  const double mu_eq = equivalent_shear(macro);
  Eigen::VectorXd t;
  if (model == "rmm") {
    t.resize(4);
    t << m.mu, m.mu_star, m.lambda, mu_eq;  // Lc = 1 mm
  } else if (model == "cosserat") {
    t.resize(2);
    t << 1.0, mu_eq;
  } else if (model == "mm-simple") {
    t.resize(5);
    t << m.mu, m.mu_star, m.lambda, 1.0, mu_eq;
  } else {
    t.resize(7);
    t << m.mu, m.mu_star, m.lambda, 1.0, 1.0, 1.0, 1.0;
  }
  return t;
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

RefBc parse_bc(const std::string& s) {
  if (s == "affine") return RefBc::Affine;
  if (s == "periodic") return RefBc::Periodic;
  if (s == "quadratic") return RefBc::Quadratic;
  throw CLI::ValidationError("--bc must be affine|periodic|quadratic");
}

void print_fit(const FitReport& rep, double mu_eq) {
  std::printf("%-5s", "iter");
  for (const auto& n : rep.param_names) std::printf("  %12s", n.c_str());
  std::printf("  %12s  %8s\n", "r2", "beta");
  for (size_t k = 0; k < rep.trace.size(); ++k) {
    const auto& it = rep.trace[k];
    std::printf("%-5zu", k);
    for (int j = 0; j < it.theta.size(); ++j)
      std::printf("  %12.5g", it.theta(j));
    std::printf("  %12.5g  %8.4f\n", it.r2, it.beta);
  }
  for (size_t j = 0; j < rep.param_names.size(); ++j)
    if (rep.param_names[j] == "mu_lc_sq" && mu_eq > 0.0)
      std::printf("derived Lc = %.6g mm (mu_eq = %.6g kN/mm^2)\n",
                  std::sqrt(rep.final_theta(j) / mu_eq), mu_eq);
  std::printf("%s (%s), final r2 = %.6g\n",
              rep.converged ? "converged" : (rep.stalled ? "stalled" : "stopped"),
              rep.reason.c_str(), rep.final_r2);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Least-squares identification of enriched-continuum parameters from "
      "heterogeneous unit-cell energies"};
  app.require_subcommand(1);

  // --- homogenize ------------------------------------------------------------
  Common hc;
  std::string h_bc = "periodic";
  int h_refine = 2;
  auto* hom = app.add_subcommand(
      "homogenize", "macro cubic moduli from canonical affine modes");
  add_common(hom, hc);
  hom->add_option("--bc", h_bc, "affine|periodic")->capture_default_str();
  hom->add_option("--refine", h_refine, "mesh refinement of the unit cell")
      ->capture_default_str();

  // --- reference -------------------------------------------------------------
  Common rc;
  std::string r_bc = "quadratic", r_mode_set = "random", r_out = "reference.txt";
  int r_count = 12, r_refine = 1;
  std::uint64_t r_seed = 42;
  std::vector<int> r_sizes{1, 2, 3};
  auto* refc = app.add_subcommand(
      "reference", "heterogeneous reference energies on the (mode, size) grid");
  add_common(refc, rc);
  refc->add_option("--bc", r_bc, "affine|periodic|quadratic")
      ->capture_default_str();
  refc->add_option("--mode-set", r_mode_set, "canonical|validation|random")
      ->capture_default_str();
  refc->add_option("--modes", r_count, "number of random modes")
      ->capture_default_str();
  refc->add_option("--seed", r_seed, "random-mode seed")->capture_default_str();
  refc->add_option("--sizes", r_sizes, "cells per direction")
      ->delimiter(',')
      ->capture_default_str();
  refc->add_option("--refine", r_refine, "mesh refinement")->capture_default_str();
  refc->add_option("--out", r_out, "output dataset path")->capture_default_str();

  // --- fit -------------------------------------------------------------------
  Common fc;
  std::string f_model = "rmm", f_ref, f_out;
  std::vector<double> f_init, f_macro;
  FitOptions f_opt;
  auto* fit = app.add_subcommand(
      "fit", "iterative least-squares fit of a homogeneous model");
  add_common(fit, fc);
  fit->add_option("--model", f_model, "rmm|cosserat|mm-simple|mm-iso")
      ->capture_default_str();
  fit->add_option("--ref", f_ref, "reference dataset file")->required();
  fit->add_option("--macro", f_macro,
                  "frozen macro moduli mu,mu_star,lambda (default: periodic "
                  "homogenization of the reference geometry)")
      ->delimiter(',')
      ->expected(3);
  fit->add_option("--init", f_init, "initial parameter vector")->delimiter(',');
  fit->add_flag("--constrained", f_opt.constrained,
                "clamp the micro moduli at the matrix-material bound");
  fit->add_option("--tol", f_opt.tol, "relative r2 decrease tolerance")
      ->capture_default_str();
  fit->add_option("--max-iterations", f_opt.max_iterations, "iteration cap")
      ->capture_default_str();
  fit->add_option("--cells", f_opt.n_cells_hint,
                  "homogeneous mesh cells per direction")
      ->capture_default_str();
  fit->add_option("--kappa", f_opt.kappa,
                  "coupling penalty weight (negative = automatic)")
      ->capture_default_str();
  fit->add_option("--out", f_out, "iteration report path");

  // --- sweep -----------------------------------------------------------------
  Common sc;
  std::string s_model = "rmm", s_out = "sweep.csv";
  std::vector<double> s_params, s_macro;
  std::vector<int> s_sizes{1, 2, 3, 4};
  int s_cells = 12;
  auto* sweep = app.add_subcommand(
      "sweep", "model energies of the validation modes across cell counts");
  add_common(sweep, sc);
  sweep->add_option("--model", s_model, "rmm|cosserat|mm-simple|mm-iso")
      ->capture_default_str();
  sweep->add_option("--params", s_params, "model parameter vector")
      ->delimiter(',')
      ->required();
  sweep->add_option("--macro", s_macro, "frozen macro moduli mu,mu_star,lambda")
      ->delimiter(',')
      ->expected(3);
  sweep->add_option("--sizes", s_sizes, "cells per direction")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--cells", s_cells, "homogeneous mesh cells per direction")
      ->capture_default_str();
  sweep->add_option("--out", s_out, "CSV path")->capture_default_str();

  // --- validate --------------------------------------------------------------
  Common vc;
  std::string v_model = "rmm";
  std::vector<double> v_params, v_macro;
  std::vector<int> v_sizes{1, 2, 3, 4};
  int v_refine = 1, v_cells = 12;
  auto* val = app.add_subcommand(
      "validate",
      "fitted model vs heterogeneous energies on the validation modes");
  add_common(val, vc);
  val->add_option("--model", v_model, "rmm|cosserat|mm-simple|mm-iso")
      ->capture_default_str();
  val->add_option("--params", v_params, "model parameter vector")
      ->delimiter(',')
      ->required();
  val->add_option("--macro", v_macro, "frozen macro moduli mu,mu_star,lambda")
      ->delimiter(',')
      ->expected(3);
  val->add_option("--sizes", v_sizes, "cells per direction")
      ->delimiter(',')
      ->capture_default_str();
  val->add_option("--refine", v_refine, "reference mesh refinement")
      ->capture_default_str();
  val->add_option("--cells", v_cells, "homogeneous mesh cells per direction")
      ->capture_default_str();

  // --- acceptance ------------------------------------------------------------
  Common ac;
  auto* acc = app.add_subcommand("acceptance", "run the acceptance suite");
  add_common(acc, ac);

  CLI11_PARSE(app, argc, argv);

  try {
    if (hom->parsed()) {
      const UnitCellGeometry geom = hc.geometry();
      const CubicModuli c =
          homogenize_macro(geom, parse_bc(h_bc), h_refine, hc.threads);
      std::printf("mu       = %10.5g kN/mm^2\n", c.mu);
      std::printf("mu_star  = %10.5g kN/mm^2\n", c.mu_star);
      std::printf("lambda   = %10.5g kN/mm^2\n", c.lambda);
      std::printf("mu_eq    = %10.5g kN/mm^2\n", equivalent_shear(c));
    } else if (refc->parsed()) {
      const UnitCellGeometry geom = rc.geometry();
      const ReferenceDataset ref =
          build_reference(geom, make_modes(r_mode_set, r_count, r_seed), r_sizes,
                          parse_bc(r_bc), r_refine, rc.threads);
      save_reference(ref, r_out);
      std::printf("wrote %d modes x %d sizes to %s (provenance %016llx)\n",
                  ref.n_modes(), ref.n_sizes(), r_out.c_str(),
                  static_cast<unsigned long long>(ref.provenance));
    } else if (fit->parsed()) {
      const ReferenceDataset ref = load_reference(f_ref);
      const CubicModuli macro =
          f_macro.empty()
              ? homogenize_macro(ref.geom, RefBc::Periodic, 2, fc.threads)
              : CubicModuli{f_macro[0], f_macro[1], f_macro[2]};
      const ModelFamily family = make_family(f_model, macro);
      const Eigen::VectorXd init = f_init.empty()
                                       ? default_init(f_model, ref.geom, macro)
                                       : to_vec(f_init);
      f_opt.threads = fc.threads;
      const FitReport rep = fit_iterative(family, ref, init, f_opt);
      const double mu_eq = equivalent_shear(macro);
      print_fit(rep, mu_eq);
      if (!f_out.empty()) save_report(rep, f_out, ref.provenance, mu_eq);
    } else if (sweep->parsed()) {
      const UnitCellGeometry geom = sc.geometry();
      const CubicModuli macro =
          s_macro.empty()
              ? homogenize_macro(geom, RefBc::Periodic, 2, sc.threads)
              : CubicModuli{s_macro[0], s_macro[1], s_macro[2]};
      const ModelFamily family = make_family(s_model, macro);
      ReferenceDataset grid;  // evaluation grid only; energies stay empty
      grid.modes = validation_modes();
      grid.sizes = s_sizes;
      grid.bc = RefBc::Quadratic;
      grid.geom = geom;
      const ModelEvaluator eval(grid, s_cells, -1.0, sc.threads);
      const Eigen::VectorXd e = eval.energies(family.pack(to_vec(s_params)));
      std::vector<SweepRecord> records;
      for (int i = 0; i < grid.n_modes(); ++i)
        for (int k = 0; k < grid.n_sizes(); ++k)
          records.push_back({s_model, grid.modes[i].label,
                             static_cast<double>(grid.sizes[k]),
                             e(i * grid.n_sizes() + k)});
      save_sweep_csv(records, s_out, 0);
      std::printf("wrote %zu rows to %s\n", records.size(), s_out.c_str());
    } else if (val->parsed()) {
      const UnitCellGeometry geom = vc.geometry();
      const ReferenceDataset ref =
          build_reference(geom, validation_modes(), v_sizes, RefBc::Quadratic,
                          v_refine, vc.threads);
      const CubicModuli macro =
          v_macro.empty()
              ? homogenize_macro(geom, RefBc::Periodic, 2, vc.threads)
              : CubicModuli{v_macro[0], v_macro[1], v_macro[2]};
      const ModelFamily family = make_family(v_model, macro);
      const ModelEvaluator eval(ref, v_cells, -1.0, vc.threads);
      const Eigen::VectorXd e = eval.energies(family.pack(to_vec(v_params)));
      std::printf("%-12s  %4s  %14s  %14s  %9s\n", "mode", "n", "reference",
                  v_model.c_str(), "rel err");
      for (int i = 0; i < ref.n_modes(); ++i)
        for (int k = 0; k < ref.n_sizes(); ++k) {
          const double a = ref.energy(i, k), b = e(i * ref.n_sizes() + k);
          std::printf("%-12s  %4d  %14.6g  %14.6g  %8.2f%%\n",
                      ref.modes[i].label.c_str(), ref.sizes[k], a, b,
                      100.0 * (b - a) / a);
        }
    } else if (acc->parsed()) {
      const auto results = run_acceptance(ac.threads);
      print_acceptance(results);
      for (const auto& r : results)
        if (!r.pass) return 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
