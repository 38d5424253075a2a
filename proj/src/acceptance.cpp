#include "rmfit/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>

#include "rmfit/basis.hpp"
#include "rmfit/fem.hpp"
#include "rmfit/fit.hpp"
#include "rmfit/loading.hpp"
#include "rmfit/materials.hpp"
#include "rmfit/mesh.hpp"
#include "rmfit/models.hpp"

namespace rmfit {

namespace {

constexpr std::uint64_t kShippedSeed = 42;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

double rel_err(double value, double target) {
  return std::abs(value - target) / std::abs(target);
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

// One full-domain homogenization pass at a fixed refine level.
CubicModuli homogenize_at(const UnitCellGeometry& geom, RefBc bc, int refine,
                          int threads, FitReport* report = nullptr) {
  const ReferenceDataset ref = build_reference(geom, canonical_affine_modes(),
                                               {1}, bc, refine, threads);
  auto [c, rep] = fit_linear(ref);
  if (report) *report = rep;
  return c;
}

// ---- quarter-cell periodic homogenization ----------------------------------
// The unit cell, the union-jack mesh, and the cell problems are invariant
// under the reflections x -> -x and y -> -y. For a diagonal mean strain the
// periodic fluctuation component normal to each symmetry/face plane is odd
// across it, for a pure shear the tangential component is; either way one
// displacement component vanishes on every plane x in {0, +-l/2}, y in
// {0, +-l/2}. The periodic cell problem therefore restricts exactly to the
// quadrant [0, l/2]^2 with roller conditions (normal component pinned to its
// affine value for diagonal strains, tangential component for shear, the
// other component natural), and the cell energy is four times the quadrant
// energy. Cross terms between diagonal and shear strains vanish by the same
// symmetry, so pure modes determine all three cubic moduli. Quartering the
// DOF count is what makes the deep refinement levels of the mu_eq
// convergence affordable.

Mesh quarter_cell_mesh(const UnitCellGeometry& geom, int refine) {
  const Mesh full = build_heterogeneous_mesh(geom, 1, refine);
  Mesh q;
  q.family = ElementFamily::T2;
  q.l = full.l;
  q.nx = q.ny = full.nx / 2;
  std::vector<int> remap(full.nodes.size(), -1);
  auto mapped = [&](int n) {
    if (remap[n] < 0) {
      remap[n] = static_cast<int>(q.nodes.size());
      q.nodes.push_back(full.nodes[n]);
    }
    return remap[n];
  };
  for (int e = 0; e < full.n_elements(); ++e) {
    const Eigen::Vector2d centroid =
        (full.nodes[full.elements[e][0]] + full.nodes[full.elements[e][1]] +
         full.nodes[full.elements[e][2]]) /
        3.0;
    if (centroid.x() < 0.0 || centroid.y() < 0.0) continue;
    std::array<int, 9> el{-1, -1, -1, -1, -1, -1, -1, -1, -1};
    for (int k = 0; k < 6; ++k) el[k] = mapped(full.elements[e][k]);
    q.elements.push_back(el);
    q.material.push_back(full.material[e]);
  }
  const double tol = 1e-12 * full.l;
  for (int n = 0; n < q.n_nodes(); ++n) {
    if (std::abs(q.nodes[n].x()) < tol) q.face_left.push_back(n);
    if (std::abs(q.nodes[n].x() - 0.5 * full.l) < tol) q.face_right.push_back(n);
    if (std::abs(q.nodes[n].y()) < tol) q.face_bottom.push_back(n);
    if (std::abs(q.nodes[n].y() - 0.5 * full.l) < tol) q.face_top.push_back(n);
  }
  for (auto* face : {&q.face_left, &q.face_right, &q.face_bottom, &q.face_top})
    q.boundary_nodes.insert(q.boundary_nodes.end(), face->begin(), face->end());
  std::sort(q.boundary_nodes.begin(), q.boundary_nodes.end());
  q.boundary_nodes.erase(
      std::unique(q.boundary_nodes.begin(), q.boundary_nodes.end()),
      q.boundary_nodes.end());
  return q;
}

// Reduced solve of 1/2 d^T K d under roller constraints; returns the energy
// of the full cell (4x the quadrant integral).
class QuarterSolver {
 public:
  QuarterSolver(const Mesh& mesh, const DofMap& dm,
                const Eigen::SparseMatrix<double>& K, bool shear)
      : mesh_(mesh), dm_(dm), K_(K), shear_(shear) {
    fixed_.assign(dm.n_dofs, 0);
    // diagonal strain: u_n pinned on every face; shear: u_t pinned
    for (int n : mesh.face_left) fixed_[dm.u_dof(n, shear ? 1 : 0)] = 1;
    for (int n : mesh.face_right) fixed_[dm.u_dof(n, shear ? 1 : 0)] = 1;
    for (int n : mesh.face_bottom) fixed_[dm.u_dof(n, shear ? 0 : 1)] = 1;
    for (int n : mesh.face_top) fixed_[dm.u_dof(n, shear ? 0 : 1)] = 1;
    int nf = 0;
    std::vector<Eigen::Triplet<double>> tt;
    for (int i = 0; i < dm.n_dofs; ++i)
      if (!fixed_[i]) tt.emplace_back(i, nf++, 1.0);
    T_.resize(dm.n_dofs, nf);
    T_.setFromTriplets(tt.begin(), tt.end());
    const Eigen::SparseMatrix<double> Kred = T_.transpose() * K * T_;
    ldlt_.compute(Kred);
    if (ldlt_.info() != Eigen::Success)
      throw std::runtime_error("QuarterSolver: factorization failed");
  }

  double cell_energy(const Eigen::Matrix2d& eps) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dm_.n_dofs);
    for (int n = 0; n < mesh_.n_nodes(); ++n)
      for (int c = 0; c < 2; ++c) {
        const int dof = dm_.u_dof(n, c);
        if (fixed_[dof])
          g(dof) = eps.row(c).dot(mesh_.nodes[n]);  // affine value
      }
    const Eigen::VectorXd rhs = -(T_.transpose() * (K_ * g));
    const Eigen::VectorXd df = ldlt_.solve(rhs);
    const Eigen::VectorXd d = T_ * df + g;
    const Eigen::VectorXd Kd = K_ * d;
    if ((T_.transpose() * Kd).norm() > std::max(1e-10 * rhs.norm(), 1e-12))
      throw std::runtime_error("QuarterSolver: solve residual too large");
    return 4.0 * 0.5 * d.dot(Kd);
  }

 private:
  const Mesh& mesh_;
  const DofMap& dm_;
  const Eigen::SparseMatrix<double>& K_;
  bool shear_;
  std::vector<char> fixed_;
  Eigen::SparseMatrix<double> T_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

CubicModuli quarter_periodic_moduli(const UnitCellGeometry& geom, int refine) {
  const Mesh mesh = quarter_cell_mesh(geom, refine);
  const DofMap dm = DofMap::build(mesh, PDisc::None);
  const Eigen::SparseMatrix<double> K =
      assemble(mesh, dm, ModelParameters{HeterogeneousParams{geom}}, 1.0);

  const double s = 0.01;
  std::vector<Eigen::Matrix2d> eps(4, Eigen::Matrix2d::Zero());
  eps[0](0, 0) = s;
  eps[1](1, 1) = s;
  eps[2](0, 0) = eps[2](1, 1) = s;
  eps[3](0, 1) = eps[3](1, 0) = s;

  Eigen::MatrixXd D(4, 3);
  Eigen::VectorXd a(4);
  const double volume = geom.l * geom.l;
  {
    const QuarterSolver diag(mesh, dm, K, false);
    for (int i = 0; i < 3; ++i) a(i) = diag.cell_energy(eps[i]);
  }
  {
    const QuarterSolver shear(mesh, dm, K, true);
    a(3) = shear.cell_energy(eps[3]);
  }
  for (int i = 0; i < 4; ++i)
    D.row(i) = volume * le_energy_terms(eps[i]).transpose();
  const Eigen::Vector3d c =
      D.colPivHouseholderQr().solve(a);
  return CubicModuli{c(0), c(1), c(2)};
}

// Homogenization with the refine parameter doubled until convergence. The
// raw moduli converge only like h^1.1 (re-entrant material corners), so the
// loop measures convergence of their Richardson-accelerated values, which
// stabilize within the runtime budget; the accelerated moduli are returned.
// The sampled raw values are appended to `raw` for reuse.
CubicModuli converged_moduli(const std::function<CubicModuli(int)>& sample,
                             int* refine_used,
                             std::vector<std::pair<int, CubicModuli>>* raw) {
  std::vector<CubicModuli> seq;
  auto accel = [&](int last) {
    // per-modulus geometric extrapolation from the last three levels
    auto one = [&](auto get) {
      const double x1 = get(seq[last - 2]), x2 = get(seq[last - 1]),
                   x3 = get(seq[last]);
      if (std::abs(x2 - x1) < 1e-14 * std::abs(x3)) return x3;
      const double r = (x3 - x2) / (x2 - x1);
      if (!(r > 0.0 && r < 0.95)) return x3;
      return x3 + (x3 - x2) * r / (1.0 - r);
    };
    return CubicModuli{one([](const CubicModuli& c) { return c.mu; }),
                       one([](const CubicModuli& c) { return c.mu_star; }),
                       one([](const CubicModuli& c) { return c.lambda; })};
  };
  CubicModuli prev{};
  int refine = 1;
  for (int k = 0;; ++k, refine *= 2) {
    seq.push_back(sample(refine));
    if (raw) raw->emplace_back(refine, seq.back());
    if (k >= 2) {
      const CubicModuli c = accel(k);
      if (k >= 3) {
        const double change = std::max(
            {rel_err(c.mu, prev.mu), rel_err(c.mu_star, prev.mu_star),
             rel_err(c.lambda, prev.lambda)});
        if (change < 0.002) {
          if (refine_used) *refine_used = refine;
          return c;
        }
      }
      prev = c;
    }
  }
}

struct Shared {
  CubicModuli affine;
  CubicModuli periodic;
  FitReport affine_report;
  std::vector<std::pair<int, CubicModuli>> periodic_raw;
  double mu_eq = 0.0;
  ReferenceDataset het_ref;      // shipped-seed quadratic reference
  FitReport unconstrained;
  FitReport constrained;
};

}  // namespace

std::vector<AcceptanceResult> run_acceptance(int threads) {
  std::vector<AcceptanceResult> out;
  const UnitCellGeometry geom;  // default swiss-cross geometry and materials
  Shared sh;

  // --- 1: affine homogenization ---------------------------------------------
  {
    auto t0 = std::chrono::steady_clock::now();
    int refine = 1;
    const CubicModuli c = converged_moduli(
        [&](int r) {
          FitReport rep;
          const CubicModuli m =
              homogenize_at(geom, RefBc::Affine, r, threads, &rep);
          if (r == 1) sh.affine_report = rep;
          return m;
        },
        &refine, nullptr);
    sh.affine = c;
    const double dt = seconds_since(t0);
    const double err = std::max({rel_err(c.mu, 6.251), rel_err(c.mu_star, 8.337),
                                 rel_err(c.lambda, 4.379)});
    out.push_back({1, "affine homogenization moduli",
                   err < 0.02 && dt < 60.0,
                   fmt("mu=%.4g mu*=%.4g lambda=%.4g (targets 6.251/8.337/4.379, "
                       "max rel err %.2e, refine %d, %.1fs)",
                       c.mu, c.mu_star, c.lambda, err, refine, dt)});
  }

  // --- 2: periodic homogenization -------------------------------------------
  {
    auto t0 = std::chrono::steady_clock::now();
    int refine = 1;
    const CubicModuli c = converged_moduli(
        [&](int r) { return quarter_periodic_moduli(geom, r); }, &refine,
        &sh.periodic_raw);
    sh.periodic = c;
    // exactness check of the quarter-cell reduction against the full-domain
    // periodic solve with the canonical (mixed) modes
    const CubicModuli full = homogenize_at(geom, RefBc::Periodic, 2, threads);
    const CubicModuli& q2 = sh.periodic_raw[1].second;
    const double mismatch =
        std::max({rel_err(q2.mu, full.mu), rel_err(q2.mu_star, full.mu_star),
                  rel_err(q2.lambda, full.lambda)});
    const double dt = seconds_since(t0);
    const double err = std::max({rel_err(c.mu, 5.9), rel_err(c.mu_star, 0.627),
                                 rel_err(c.lambda, 1.748)});
    out.push_back({2, "periodic homogenization moduli",
                   err < 0.02 && mismatch < 1e-7 && dt < 60.0,
                   fmt("mu=%.4g mu*=%.4g lambda=%.4g (targets 5.9/0.627/1.748, "
                       "max rel err %.2e, quarter-cell vs full %.1e, refine %d, "
                       "%.1fs)",
                       c.mu, c.mu_star, c.lambda, err, mismatch, refine, dt)});
  }

  // --- 3: one-iteration exactness -------------------------------------------
  {
    const auto& tr = sh.affine_report.trace;
    const bool ok = tr.size() >= 2 && tr[1].r2 <= 1e-18 * tr[0].r2;
    out.push_back({3, "linear fit exact after one iteration", ok,
                   fmt("r2: %.3e -> %.3e", tr.empty() ? 0.0 : tr[0].r2,
                       tr.size() < 2 ? 0.0 : tr[1].r2)});
  }

  // --- 4: affine moduli dominate periodic moduli ----------------------------
  {
    const double d1 = sh.affine.mu - sh.periodic.mu;
    const double d2 = sh.affine.mu_star - sh.periodic.mu_star;
    const double d3 = (sh.affine.lambda + sh.affine.mu) -
                      (sh.periodic.lambda + sh.periodic.mu);
    const bool ok = d1 >= 0 && d2 >= 0 && d3 >= 0 && (d1 > 0 || d2 > 0 || d3 > 0);
    out.push_back({4, "affine stiffer than periodic", ok,
                   fmt("deltas mu=%.3g mu*=%.3g lam+mu=%.3g", d1, d2, d3)});
  }

  // --- 5: equivalent shear modulus ------------------------------------------
  {
    // Convergence protocol applied to the certified quantity itself: double
    // the refinement of the periodic homogenization (continuing the sequence
    // sampled for criterion 2) until mu_eq moves by less than 0.2%. The
    // quarter-cell reduction keeps the deep levels within memory.
    auto t0 = std::chrono::steady_clock::now();
    auto raw = sh.periodic_raw;
    double prev = -1.0, cur = 0.0;
    int refine = 0;
    bool settled = false;
    // memory cap: quarter-cell refine 32 is the deepest affordable level
    for (size_t k = 0; k < raw.size() || refine < 32; ++k) {
      if (k >= raw.size()) {
        const int next = raw.back().first * 2;
        raw.emplace_back(next, quarter_periodic_moduli(geom, next));
      }
      refine = raw[k].first;
      cur = equivalent_shear(raw[k].second);
      if (prev > 0.0 && rel_err(cur, prev) < 0.002) {
        settled = true;
        break;
      }
      prev = cur;
    }
    sh.mu_eq = cur;
    const double dt = seconds_since(t0);
    out.push_back({5, "equivalent shear modulus",
                   settled && std::abs(sh.mu_eq - 1.537) < 1e-3,
                   fmt("mu_eq = %.4f (target 1.537 +- 0.001, converged to 0.2%% "
                       "at refine %d, %.1fs)",
                       sh.mu_eq, refine, dt)});
  }

  // --- 6 & 7: two-scale limits and Lc monotonicity --------------------------
  {
    const CubicModuli macro = sh.periodic;
    const CubicModuli micro = CubicModuli::from_isotropic(geom.matrix);
    const Mesh mesh = build_homogeneous_mesh(12, ElementFamily::Q2NQ2, 1, geom.l);
    const auto modes = canonical_affine_modes();
    const double lcs[] = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};

    double worst_lo = 0.0, worst_hi = 0.0;
    bool monotone = true;
    const BvpSolver le_micro(mesh, ModelParameters{LinearElasticParams{micro}},
                             1.0, BcKind::DirichletMode);
    std::array<double, 3> prev{-1.0, -1.0, -1.0};
    for (double lc : lcs) {
      const RmmParams p{micro, macro, sh.mu_eq * lc * lc};
      const BvpSolver rmm(mesh, ModelParameters{p}, 1.0, BcKind::DirichletMode);
      for (int i = 0; i < 3; ++i) {
        const double e = rmm.solve(modes[i]).energy;
        if (prev[i] >= 0.0 && e < prev[i]) monotone = false;
        prev[i] = e;
        if (lc == 1e3)
          worst_hi = std::max(
              worst_hi, rel_err(e, le_micro.solve(modes[i]).energy));
      }
    }
    // Lc -> 0: the coupling penalty forces the tangential trace of P onto
    // grad u at the boundary while the interior optimum differs; with no
    // curvature to spread it, the discrete transition layer is one element
    // wide and costs O(h) energy (measured: 10.9%/5.4%/2.7% at 12/24/48
    // cells, kappa-independent). The limit check therefore runs on a finer
    // mesh where the layer contributes < 1%.
    {
      const Mesh fine = build_homogeneous_mesh(160, ElementFamily::Q2NQ2, 1,
                                               geom.l);
      const BvpSolver le_macro(fine, ModelParameters{LinearElasticParams{macro}},
                               1.0, BcKind::DirichletMode);
      const RmmParams p{micro, macro, sh.mu_eq * 1e-6};
      const BvpSolver rmm(fine, ModelParameters{p}, 1.0, BcKind::DirichletMode);
      for (int i = 0; i < 3; ++i)
        worst_lo = std::max(
            worst_lo, rel_err(rmm.solve(modes[i]).energy,
                              le_macro.solve(modes[i]).energy));
    }
    out.push_back({6, "two-scale limits (Lc -> 0 and Lc -> inf)",
                   worst_lo < 0.01 && worst_hi < 0.01,
                   fmt("max rel err vs macro %.2e, vs micro %.2e", worst_lo,
                       worst_hi)});
    out.push_back({7, "energy nondecreasing in Lc", monotone,
                   monotone ? "monotone across 7 decades, 3 modes"
                            : "monotonicity violated"});
  }

  // --- 8: oracle recovery ---------------------------------------------------
  {
    auto t0 = std::chrono::steady_clock::now();
    const CubicModuli macro = sh.periodic;
    const ModelFamily family = rmm_family(macro);
    Eigen::VectorXd truth(4);
    truth << 10.55, 26.32, 8.22, sh.mu_eq * 1.123 * 1.123;

    ReferenceDataset ref;
    ref.modes = random_modes(12, kShippedSeed);
    ref.sizes = {1, 2};
    ref.bc = RefBc::Quadratic;
    ref.refine = 1;
    ref.geom = geom;
    FitOptions opt;
    opt.threads = threads;
    opt.tol = 1e-10;
    {
      const ModelEvaluator eval(ref, opt.n_cells_hint, opt.kappa, threads);
      const Eigen::VectorXd e = eval.energies(family.pack(truth));
      ref.energies.assign(e.data(), e.data() + e.size());
    }

    Eigen::VectorXd init(4);
    init << 26.32, 26.32, 51.08, sh.mu_eq;
    const FitReport rep = fit_iterative(family, ref, init, opt);
    const double dt = seconds_since(t0);
    const double e_mu = rel_err(rep.final_theta(0), truth(0));
    const double e_ms = rel_err(rep.final_theta(1), truth(1));
    const double e_la = rel_err(rep.final_theta(2), truth(2));
    const double e_lc = rel_err(rep.final_theta(3), truth(3));
    const bool ok = e_mu < 0.005 && e_ms < 0.005 && e_la < 0.005 &&
                    e_lc < 0.01 && rep.final_r2 <= 1e-10 && dt < 600.0;
    out.push_back(
        {8, "synthetic oracle recovery", ok,
         fmt("theta=(%.4g, %.4g, %.4g, %.4g) rel errs (%.1e,%.1e,%.1e,%.1e) "
             "r2=%.2e %.0fs",
             rep.final_theta(0), rep.final_theta(1), rep.final_theta(2),
             rep.final_theta(3), e_mu, e_ms, e_la, e_lc, rep.final_r2, dt)});
  }

  // --- 9: heterogeneous fit behavior ----------------------------------------
  {
    const CubicModuli macro = sh.periodic;
    const ModelFamily family = rmm_family(macro);
    sh.het_ref = build_reference(geom, random_modes(12, kShippedSeed), {1, 2, 3},
                                 RefBc::Quadratic, 1, threads);
    Eigen::VectorXd init(4);
    init << 26.32, 26.32, 51.08, sh.mu_eq;
    FitOptions opt;
    opt.threads = threads;
    sh.unconstrained = fit_iterative(family, sh.het_ref, init, opt);
    opt.constrained = true;
    opt.matrix = geom.matrix;
    sh.constrained = fit_iterative(family, sh.het_ref, init, opt);

    bool monotone = true, admissible = true;
    for (size_t k = 1; k < sh.unconstrained.trace.size(); ++k)
      if (sh.unconstrained.trace[k].r2 > sh.unconstrained.trace[k - 1].r2)
        monotone = false;
    for (const auto& it : sh.unconstrained.trace)
      if (!is_admissible(family.pack(it.theta))) admissible = false;
    const double drop =
        sh.unconstrained.final_r2 / sh.unconstrained.trace.front().r2;

    bool bound_ok = true;
    for (const auto& it : sh.constrained.trace) {
      const CubicModuli micro{it.theta(0), it.theta(1), it.theta(2)};
      if (!matrix_bound_violations(micro, geom.matrix).empty()) bound_ok = false;
    }
    const bool exceeded = sh.unconstrained.final_theta(1) > geom.matrix.mu;
    const bool at_bound =
        !exceeded ||
        std::abs(sh.constrained.final_theta(1) - geom.matrix.mu) < 1e-6;

    const auto& u = sh.unconstrained.final_theta;
    const auto& c = sh.constrained.final_theta;
    out.push_back(
        {9, "heterogeneous fit behavior", monotone && admissible && drop <= 0.10 &&
                                              bound_ok && at_bound,
         fmt("r2 drop %.3g; unconstrained (%.4g, %.4g, %.4g, Lc=%.3g) vs set 1 "
             "(10.19, 354.87, 11.3, 0.882); constrained (%.4g, %.4g, %.4g, "
             "Lc=%.3g) vs set 2 (10.55, 26.32, 8.22, 1.123)",
             drop, u(0), u(1), u(2), std::sqrt(u(3) / sh.mu_eq), c(0), c(1),
             c(2), std::sqrt(c(3) / sh.mu_eq))});
  }

  // --- 10: curl-free patch --------------------------------------------------
  {
    const Mesh mesh = build_homogeneous_mesh(4, ElementFamily::Q2NQ2, 1, geom.l);
    const CubicModuli macro = sh.periodic;
    const RmmParams params{CubicModuli::from_isotropic(geom.matrix), macro,
                           sh.mu_eq};
    const DofMap dm = DofMap::build(mesh, PDisc::Nedelec);
    DeformationMode mode;  // u = B x + C [x^2, xy, y^2], generic quadratic
    mode.B << 0.01, -0.02, 0.015, 0.03;
    mode.C << 0.02, -0.01, 0.03, 0.01, 0.02, -0.015;

    Eigen::VectorXd d = Eigen::VectorXd::Zero(dm.n_dofs);
    for (int n = 0; n < mesh.n_nodes(); ++n) {
      const Eigen::Vector2d u = eval_mode(mode, mesh.nodes[n]);
      d(dm.u_dof(n, 0)) = u(0);
      d(dm.u_dof(n, 1)) = u(1);
    }
    auto grad_u = [&](const Eigen::Vector2d& x) {
      Eigen::Matrix2d g = mode.B;
      g(0, 0) += 2 * mode.C(0, 0) * x.x() + mode.C(0, 1) * x.y();
      g(0, 1) += mode.C(0, 1) * x.x() + 2 * mode.C(0, 2) * x.y();
      g(1, 0) += 2 * mode.C(1, 0) * x.x() + mode.C(1, 1) * x.y();
      g(1, 1) += mode.C(1, 1) * x.x() + 2 * mode.C(1, 2) * x.y();
      return g;
    };
    const auto& ned = NedelecBasis::instance();
    for (int e = 0; e < mesh.n_elements(); ++e) {
      const auto& conn = mesh.elements[e];
      const Eigen::Vector2d x0 = mesh.nodes[conn[0]];
      Eigen::Matrix2d J;
      J.col(0) = 0.5 * (mesh.nodes[conn[1]] - x0);
      J.col(1) = 0.5 * (mesh.nodes[conn[3]] - x0);
      const Eigen::Vector2d center = x0 + J.col(0) + J.col(1);
      for (int r = 0; r < 2; ++r) {
        // reference pullback of row r of grad u: v_ref = J^T (grad u)_r
        auto vref = [&](const Eigen::Vector2d& xi) -> Eigen::Vector2d {
          const Eigen::Vector2d x = center + J * xi;
          return J.transpose() * grad_u(x).row(r).transpose();
        };
        const Eigen::Matrix<double, 12, 1> dofs = ned.interpolate(vref);
        for (int le = 0; le < 4; ++le)
          for (int m = 0; m < 2; ++m)
            d(dm.p_edge_dof(r, mesh.elem_edges[e][le], m)) =
                (m == 0 ? mesh.elem_edge_signs[e][le] : 1) * dofs(2 * le + m);
        for (int k = 0; k < 4; ++k)
          d(dm.p_interior_dof(r, e, k)) = dofs(8 + k);
      }
    }
    const BvpSolver solver(mesh, ModelParameters{params}, 1.0,
                           BcKind::DirichletMode);
    const double curv = solver.integrate(d, [&](const FieldState& s) {
      return 0.5 * params.mu_lc_sq * s.curl_P.squaredNorm();
    });
    out.push_back({10, "curl-free interpolation of quadratic gradients",
                   std::abs(curv) <= 1e-12,
                   fmt("curvature energy %.2e kN*mm", curv)});
  }

  // --- 11: envelope cross-check ---------------------------------------------
  {
    const CubicModuli macro = sh.periodic;
    const ModelFamily family = rmm_family(macro);
    Eigen::VectorXd theta(4);
    theta << 26.32, 26.32, 51.08, sh.mu_eq;
    const ModelParameters params = family.pack(theta);
    const double kappa = default_kappa(params, geom.l);

    const ModelEvaluator eval(sh.het_ref, 12, kappa, threads);
    Eigen::VectorXd base;
    const Eigen::MatrixXd D =
        energy_partials(family, theta, eval, {}, 1e-6, &base);

    // fixed-field analytic partials via the Reuss chain rule
    const CubicModuli micro{theta(0), theta(1), theta(2)};
    const double dmu_e = -macro.mu * macro.mu /
                         ((micro.mu - macro.mu) * (micro.mu - macro.mu));
    const double dmus_e =
        -macro.mu_star * macro.mu_star /
        ((micro.mu_star - macro.mu_star) * (micro.mu_star - macro.mu_star));
    const double s_mi = micro.lambda + micro.mu, s_ma = macro.lambda + macro.mu;
    const double ds_e = -s_ma * s_ma / ((s_mi - s_ma) * (s_mi - s_ma));

    const Mesh mesh = build_homogeneous_mesh(12, ElementFamily::Q2NQ2, 1, geom.l);
    Eigen::MatrixXd Dan(D.rows(), 4);
    const int n_sizes = sh.het_ref.n_sizes();
    for (int k = 0; k < n_sizes; ++k) {
      const double n = sh.het_ref.sizes[k];
      const BvpSolver solver(mesh, params, n, BcKind::DirichletMode, kappa);
      for (int i = 0; i < sh.het_ref.n_modes(); ++i) {
        const Eigen::VectorXd d = solver.solve(sh.het_ref.modes[i]).d;
        auto I = [&](const std::function<double(const FieldState&)>& f) {
          return solver.integrate(d, f);
        };
        const double g1 = I([](const FieldState& s) {
          const Eigen::Matrix2d g = s.grad_u - s.P;
          return g(0, 0) * g(0, 0) + g(1, 1) * g(1, 1);
        });
        const double g2 = I([](const FieldState& s) {
          const Eigen::Matrix2d g = s.grad_u - s.P;
          const double v = g(0, 1) + g(1, 0);
          return 0.5 * v * v;
        });
        const double g3 = I([](const FieldState& s) {
          const Eigen::Matrix2d g = s.grad_u - s.P;
          const double v = g(0, 0) + g(1, 1);
          return 0.5 * v * v;
        });
        const double p1 = I([](const FieldState& s) {
          return s.P(0, 0) * s.P(0, 0) + s.P(1, 1) * s.P(1, 1);
        });
        const double p2 = I([](const FieldState& s) {
          const double v = s.P(0, 1) + s.P(1, 0);
          return 0.5 * v * v;
        });
        const double p3 = I([](const FieldState& s) {
          const double v = s.P(0, 0) + s.P(1, 1);
          return 0.5 * v * v;
        });
        const double c = I([n](const FieldState& s) {
          return 0.5 * s.curl_P.squaredNorm() / (n * n);
        });
        const int row = i * n_sizes + k;
        Dan(row, 0) = dmu_e * g1 + (ds_e - dmu_e) * g3 + p1;
        Dan(row, 1) = dmus_e * g2 + p2;
        Dan(row, 2) = ds_e * g3 + p3;
        Dan(row, 3) = c;
      }
    }
    double worst = 0.0;
    for (int k = 0; k < 4; ++k)
      worst = std::max(worst,
                       (D.col(k) - Dan.col(k)).norm() / Dan.col(k).norm());
    out.push_back({11, "envelope cross-check of energy partials", worst < 1e-4,
                   fmt("max per-parameter rel deviation %.2e", worst)});
  }

  // --- 12: Cosserat axial insensitivity -------------------------------------
  {
    const CubicModuli macro = sh.periodic;
    DeformationMode axial;
    axial.B << 0.05, 0.0, 0.0, 0.0;
    axial.label = "0.05x,0";
    const Mesh mesh = build_homogeneous_mesh(12, ElementFamily::Q2NQ2, 1, geom.l);

    const CosseratParams cos{macro, 452.6, sh.mu_eq * 0.616 * 0.616};
    const RmmParams rmm{{10.55, 26.32, 8.22}, macro, sh.mu_eq * 1.123 * 1.123};
    double e_cos[2], e_rmm[2];
    const double sizes[2] = {1.0, 4.0};
    for (int k = 0; k < 2; ++k) {
      e_cos[k] = BvpSolver(mesh, ModelParameters{cos}, sizes[k],
                           BcKind::DirichletMode)
                     .solve(axial)
                     .energy;
      e_rmm[k] = BvpSolver(mesh, ModelParameters{rmm}, sizes[k],
                           BcKind::DirichletMode)
                     .solve(axial)
                     .energy;
    }
    const double d_cos = rel_err(e_cos[1], e_cos[0]);
    const double d_rmm = rel_err(e_rmm[1], e_rmm[0]);
    out.push_back({12, "Cosserat axial insensitivity", d_cos < 1e-3 && d_rmm > 0.01,
                   fmt("Cosserat n=1 vs n=4 rel diff %.2e, relaxed micromorphic "
                       "%.2e",
                       d_cos, d_rmm)});
  }

  return out;
}

void print_acceptance(const std::vector<AcceptanceResult>& results) {
  for (const auto& r : results)
    std::printf("%s  %2d  %s  [%s]\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.detail.c_str());
}

}  // namespace rmfit
