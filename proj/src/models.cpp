#include "rmfit/models.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace rmfit {

FieldState state_from_vector(const StateVector& s) {
  FieldState f;
  f.grad_u << s(0), s(1), s(2), s(3);
  f.P << s(4), s(5), s(6), s(7);
  f.curl_P << s(8), s(9);
  for (int r = 0; r < 4; ++r) {
    f.grad_P(r, 0) = s(10 + 2 * r);
    f.grad_P(r, 1) = s(11 + 2 * r);
  }
  return f;
}

PDisc p_discretization(const ModelParameters& params) {
  struct V {
    PDisc operator()(const LinearElasticParams&) const { return PDisc::None; }
    PDisc operator()(const HeterogeneousParams&) const { return PDisc::None; }
    PDisc operator()(const RmmParams&) const { return PDisc::Nedelec; }
    PDisc operator()(const CosseratParams&) const { return PDisc::LagrangeSkew; }
    PDisc operator()(const MicromorphicSimpleParams&) const {
      return PDisc::LagrangeVec;
    }
    PDisc operator()(const MicromorphicIsoParams&) const {
      return PDisc::LagrangeVec;
    }
  };
  return std::visit(V{}, params);
}

namespace {

void require_micro_stiffer(const CubicModuli& micro, const CubicModuli& macro) {
  if (!(micro.mu > macro.mu && micro.mu_star > macro.mu_star &&
        micro.lambda + micro.mu > macro.lambda + macro.mu)) {
    throw std::invalid_argument(
        "model parameters: micro tensor must be strictly stiffer than macro");
  }
}

}  // namespace

void check_admissible(const ModelParameters& params) {
  struct V {
    void operator()(const LinearElasticParams& p) const {
      if (!p.c.positive_definite())
        throw std::invalid_argument("linear elasticity: moduli not positive definite");
    }
    void operator()(const HeterogeneousParams& p) const { p.geom.validate(); }
    void operator()(const RmmParams& p) const {
      if (!p.macro.positive_definite())
        throw std::invalid_argument("rmm: macro tensor not positive definite");
      require_micro_stiffer(p.micro, p.macro);
      if (!(p.mu_lc_sq > 0.0))
        throw std::invalid_argument("rmm: mu*Lc^2 must be positive");
    }
    void operator()(const CosseratParams& p) const {
      if (!p.macro.positive_definite())
        throw std::invalid_argument("cosserat: macro tensor not positive definite");
      if (!(p.mu_c > 0.0))
        throw std::invalid_argument("cosserat: mu_c must be strictly positive");
      if (!(p.mu_lc_sq > 0.0))
        throw std::invalid_argument("cosserat: mu*Lc^2 must be positive");
    }
    void operator()(const MicromorphicSimpleParams& p) const {
      if (!p.macro.positive_definite())
        throw std::invalid_argument("micromorphic: macro tensor not positive definite");
      require_micro_stiffer(p.micro, p.macro);
      if (!(p.mu_c > 0.0))
        throw std::invalid_argument("micromorphic: mu_c must be strictly positive");
      if (!(p.mu_lc_sq > 0.0))
        throw std::invalid_argument("micromorphic: mu*Lc^2 must be positive");
    }
    void operator()(const MicromorphicIsoParams& p) const {
      if (!p.macro.positive_definite())
        throw std::invalid_argument("micromorphic: macro tensor not positive definite");
      require_micro_stiffer(p.micro, p.macro);
      if (!(p.mu_c > 0.0))
        throw std::invalid_argument("micromorphic: mu_c must be strictly positive");
      if (p.alpha1 < 0.0 || p.alpha2 < 0.0 || p.alpha3 < 0.0)
        throw std::invalid_argument("micromorphic: curvature alphas must be >= 0");
      if (!(p.mu_lc_sq > 0.0))
        throw std::invalid_argument("micromorphic: mu*Lc^2 must be positive");
    }
  };
  std::visit(V{}, params);
}

bool is_admissible(const ModelParameters& params) {
  try {
    check_admissible(params);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

Eigen::Vector3d le_energy_terms(const Eigen::Matrix2d& grad_u) {
  const Eigen::Matrix2d eps = 0.5 * (grad_u + grad_u.transpose());
  const double tr = eps(0, 0) + eps(1, 1);
  return {eps(0, 0) * eps(0, 0) + eps(1, 1) * eps(1, 1),
          2.0 * eps(0, 1) * eps(0, 1), 0.5 * tr * tr};
}

double le_density(const CubicModuli& c, const Eigen::Matrix2d& grad_u) {
  const Eigen::Vector3d t = le_energy_terms(grad_u);
  return c.mu * t(0) + c.mu_star * t(1) + c.lambda * t(2);
}

namespace {

// The shared gap + micro-scale part of the relaxed/full micromorphic density:
//   mu_e ((u1,1-P11)^2 + (u2,2-P22)^2) + mu*_e/2 (u1,2+u2,1-P12-P21)^2
// + lam_e/2 (u1,1+u2,2-P11-P22)^2 + mu_mi (P11^2+P22^2)
// + mu*_mi/2 (P12+P21)^2 + lam_mi/2 (P11+P22)^2
double gap_micro_terms(const CubicModuli& ce, const CubicModuli& micro,
                       const FieldState& s) {
  const Eigen::Matrix2d g = s.grad_u - s.P;
  const double off = g(0, 1) + g(1, 0);
  const double tr = g(0, 0) + g(1, 1);
  const double p_off = s.P(0, 1) + s.P(1, 0);
  const double p_tr = s.P(0, 0) + s.P(1, 1);
  return ce.mu * (g(0, 0) * g(0, 0) + g(1, 1) * g(1, 1)) +
         0.5 * ce.mu_star * off * off + 0.5 * ce.lambda * tr * tr +
         micro.mu * (s.P(0, 0) * s.P(0, 0) + s.P(1, 1) * s.P(1, 1)) +
         0.5 * micro.mu_star * p_off * p_off + 0.5 * micro.lambda * p_tr * p_tr;
}

double rotational_coupling(double mu_c, const FieldState& s) {
  const double w = s.grad_u(0, 1) - s.grad_u(1, 0) - s.P(0, 1) + s.P(1, 0);
  return 0.5 * mu_c * w * w;
}

}  // namespace

double rmm_density(const RmmParams& p, const FieldState& s, double n_cells) {
  const CubicModuli ce = reuss_ce(p.micro, p.macro);
  const double curv = s.curl_P.squaredNorm();
  return gap_micro_terms(ce, p.micro, s) +
         0.5 * p.mu_lc_sq / (n_cells * n_cells) * curv;
}

double cosserat_density(const CosseratParams& p, const FieldState& s,
                        double n_cells) {
  // The micro field is the skew tensor A carried by the scalar A12 = P(0,1);
  // curl_P then holds (A12,1, A12,2).
  const double w = s.grad_u(0, 1) - s.grad_u(1, 0) - 2.0 * s.P(0, 1);
  return le_density(p.macro, s.grad_u) + 0.5 * p.mu_c * w * w +
         0.5 * p.mu_lc_sq / (n_cells * n_cells) * s.curl_P.squaredNorm();
}

double micromorphic_simple_density(const MicromorphicSimpleParams& p,
                                   const FieldState& s, double n_cells) {
  const CubicModuli ce = reuss_ce(p.micro, p.macro);
  return gap_micro_terms(ce, p.micro, s) + rotational_coupling(p.mu_c, s) +
         0.5 * p.mu_lc_sq / (n_cells * n_cells) * s.grad_P.squaredNorm();
}

double micromorphic_iso_curvature(double alpha1, double alpha2, double alpha3,
                                  const Eigen::Matrix<double, 4, 2>& grad_P) {
  double sum = 0.0;
  for (int i = 0; i < 2; ++i) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    m(0, 0) = grad_P(0, i);
    m(0, 1) = grad_P(1, i);
    m(1, 0) = grad_P(2, i);
    m(1, 1) = grad_P(3, i);
    const Eigen::Matrix3d sym = 0.5 * (m + m.transpose());
    const Eigen::Matrix3d skw = 0.5 * (m - m.transpose());
    const double tr = m.trace();
    const Eigen::Matrix3d dev = sym - tr / 3.0 * Eigen::Matrix3d::Identity();
    sum += alpha1 * dev.squaredNorm() + alpha2 * skw.squaredNorm() +
           (2.0 / 9.0) * alpha3 * tr * tr;
  }
  return sum;
}

double micromorphic_iso_density(const MicromorphicIsoParams& p,
                                const FieldState& s, double n_cells) {
  const CubicModuli ce = reuss_ce(p.micro, p.macro);
  return gap_micro_terms(ce, p.micro, s) + rotational_coupling(p.mu_c, s) +
         0.5 * p.mu_lc_sq / (n_cells * n_cells) *
             micromorphic_iso_curvature(p.alpha1, p.alpha2, p.alpha3, s.grad_P);
}

double model_density(const ModelParameters& params, const FieldState& s,
                     double n_cells) {
  struct V {
    const FieldState& s;
    double n;
    double operator()(const LinearElasticParams& p) const {
      return le_density(p.c, s.grad_u);
    }
    double operator()(const HeterogeneousParams&) const {
      throw std::invalid_argument(
          "model_density: heterogeneous material needs a per-element Lame pair");
    }
    double operator()(const RmmParams& p) const { return rmm_density(p, s, n); }
    double operator()(const CosseratParams& p) const {
      return cosserat_density(p, s, n);
    }
    double operator()(const MicromorphicSimpleParams& p) const {
      return micromorphic_simple_density(p, s, n);
    }
    double operator()(const MicromorphicIsoParams& p) const {
      return micromorphic_iso_density(p, s, n);
    }
  };
  return std::visit(V{s, n_cells}, params);
}

StateMatrix quadratic_form(const ModelParameters& params, double n_cells) {
  check_admissible(params);
  auto w = [&](const StateVector& s) {
    return model_density(params, state_from_vector(s), n_cells);
  };
  StateMatrix a = StateMatrix::Zero();
  std::array<double, kStateDim> diag{};
  for (int i = 0; i < kStateDim; ++i) {
    StateVector e = StateVector::Zero();
    e(i) = 1.0;
    diag[i] = w(e);
    a(i, i) = 2.0 * diag[i];
  }
  for (int i = 0; i < kStateDim; ++i) {
    for (int j = i + 1; j < kStateDim; ++j) {
      StateVector e = StateVector::Zero();
      e(i) = 1.0;
      e(j) = 1.0;
      const double aij = w(e) - diag[i] - diag[j];
      a(i, j) = aij;
      a(j, i) = aij;
    }
  }
  return a;
}

}  // namespace rmfit
