#include "rmfit/basis.hpp"

#include <array>
#include <cmath>

namespace rmfit {

namespace {

inline void lag1d(double t, double v[3], double d[3]) {
  v[0] = 0.5 * t * (t - 1.0);
  v[1] = 1.0 - t * t;
  v[2] = 0.5 * t * (t + 1.0);
  d[0] = t - 0.5;
  d[1] = -2.0 * t;
  d[2] = t + 0.5;
}

// Q2 node (i,j) indices into the 1D ladder {-1,0,1}, matching the mesh order.
constexpr int kQ2i[9] = {0, 2, 2, 0, 1, 2, 1, 0, 1};
constexpr int kQ2j[9] = {0, 0, 2, 2, 0, 1, 2, 1, 1};

}  // namespace

void q2_basis(const Eigen::Vector2d& xi, Eigen::Matrix<double, 9, 1>& vals,
              Eigen::Matrix<double, 9, 2>& grads) {
  double vx[3], dx[3], vy[3], dy[3];
  lag1d(xi.x(), vx, dx);
  lag1d(xi.y(), vy, dy);
  for (int k = 0; k < 9; ++k) {
    vals(k) = vx[kQ2i[k]] * vy[kQ2j[k]];
    grads(k, 0) = dx[kQ2i[k]] * vy[kQ2j[k]];
    grads(k, 1) = vx[kQ2i[k]] * dy[kQ2j[k]];
  }
}

void t2_basis(const Eigen::Vector2d& xi, Eigen::Matrix<double, 6, 1>& vals,
              Eigen::Matrix<double, 6, 2>& grads) {
  const double x = xi.x(), y = xi.y();
  const double l1 = 1.0 - x - y, l2 = x, l3 = y;
  vals(0) = l1 * (2.0 * l1 - 1.0);
  vals(1) = l2 * (2.0 * l2 - 1.0);
  vals(2) = l3 * (2.0 * l3 - 1.0);
  vals(3) = 4.0 * l1 * l2;
  vals(4) = 4.0 * l2 * l3;
  vals(5) = 4.0 * l3 * l1;
  // dl1 = (-1,-1), dl2 = (1,0), dl3 = (0,1)
  grads(0, 0) = -(4.0 * l1 - 1.0);
  grads(0, 1) = -(4.0 * l1 - 1.0);
  grads(1, 0) = 4.0 * l2 - 1.0;
  grads(1, 1) = 0.0;
  grads(2, 0) = 0.0;
  grads(2, 1) = 4.0 * l3 - 1.0;
  grads(3, 0) = 4.0 * (l1 - l2);
  grads(3, 1) = -4.0 * l2;
  grads(4, 0) = 4.0 * l3;
  grads(4, 1) = 4.0 * l2;
  grads(5, 0) = -4.0 * l3;
  grads(5, 1) = 4.0 * (l1 - l3);
}

namespace {

// Monomial bases of Q_{1,2} (component 1) and Q_{2,1} (component 2).
void ned_monomials(const Eigen::Vector2d& xi, double m1[6], double m2[6],
                   double d1y[6], double d2x[6]) {
  const double x = xi.x(), y = xi.y();
  const double vals1[6] = {1, x, y, x * y, y * y, x * y * y};
  const double vals2[6] = {1, x, y, x * y, x * x, x * x * y};
  const double dy1[6] = {0, 0, 1, x, 2 * y, 2 * x * y};
  const double dx2[6] = {0, 1, 0, y, 2 * x, 2 * x * y};
  for (int k = 0; k < 6; ++k) {
    m1[k] = vals1[k];
    m2[k] = vals2[k];
    d1y[k] = dy1[k];
    d2x[k] = dx2[k];
  }
}

const double kG4[4] = {-0.8611363115940526, -0.3399810435848563,
                       0.3399810435848563, 0.8611363115940526};
const double kW4[4] = {0.3478548451374538, 0.6521451548625461,
                       0.6521451548625461, 0.3478548451374538};

}  // namespace

NedelecBasis::NedelecBasis() {
  Eigen::Matrix<double, 12, 12> V = Eigen::Matrix<double, 12, 12>::Zero();
  // Edge parameterizations: point(s) and tangent, canonical directions.
  struct Edge {
    Eigen::Vector2d p0, dir, tan;
  };
  const Edge edges[4] = {
      {{0.0, -1.0}, {1.0, 0.0}, {1.0, 0.0}},  // bottom: (s,-1), t=+x
      {{1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}},   // right: (1,s), t=+y
      {{0.0, 1.0}, {1.0, 0.0}, {1.0, 0.0}},   // top: (s,1), t=+x
      {{-1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}},  // left: (-1,s), t=+y
  };
  for (int e = 0; e < 4; ++e) {
    for (int g = 0; g < 4; ++g) {
      const double s = kG4[g], w = kW4[g];
      const Eigen::Vector2d xi = edges[e].p0 + s * edges[e].dir;
      double m1[6], m2[6], d1y[6], d2x[6];
      ned_monomials(xi, m1, m2, d1y, d2x);
      for (int j = 0; j < 12; ++j) {
        const double vt = j < 6 ? m1[j] * edges[e].tan.x()
                                : m2[j - 6] * edges[e].tan.y();
        V(2 * e, j) += w * vt;
        V(2 * e + 1, j) += w * vt * s;
      }
    }
  }
  const auto& q = quad_rule_q33();
  for (int g = 0; g < q.points.rows(); ++g) {
    const Eigen::Vector2d xi = q.points.row(g);
    const double w = q.weights(g);
    double m1[6], m2[6], d1y[6], d2x[6];
    ned_monomials(xi, m1, m2, d1y, d2x);
    // interior moments: v1 against {1, x}, v2 against {1, y}; pairing v1 with
    // y (and v2 with x) instead misses x*(1-y^2) and breaks unisolvence
    for (int j = 0; j < 6; ++j) {
      V(8, j) += w * m1[j];
      V(9, j) += w * m1[j] * xi.x();
      V(10, j + 6) += w * m2[j];
      V(11, j + 6) += w * m2[j] * xi.y();
    }
  }
  coeff_ = V.inverse().transpose();
}

const NedelecBasis& NedelecBasis::instance() {
  static const NedelecBasis basis;
  return basis;
}

void NedelecBasis::eval(const Eigen::Vector2d& xi,
                        Eigen::Matrix<double, 12, 2>& vals,
                        Eigen::Matrix<double, 12, 1>& curls) const {
  double m1[6], m2[6], d1y[6], d2x[6];
  ned_monomials(xi, m1, m2, d1y, d2x);
  for (int i = 0; i < 12; ++i) {
    double v1 = 0, v2 = 0, c = 0;
    for (int j = 0; j < 6; ++j) {
      v1 += coeff_(i, j) * m1[j];
      v2 += coeff_(i, j + 6) * m2[j];
      c += coeff_(i, j + 6) * d2x[j] - coeff_(i, j) * d1y[j];
    }
    vals(i, 0) = v1;
    vals(i, 1) = v2;
    curls(i) = c;
  }
}

Eigen::Matrix<double, 12, 1> NedelecBasis::interpolate(
    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& field) const {
  Eigen::Matrix<double, 12, 1> dofs = Eigen::Matrix<double, 12, 1>::Zero();
  struct Edge {
    Eigen::Vector2d p0, dir, tan;
  };
  const Edge edges[4] = {
      {{0.0, -1.0}, {1.0, 0.0}, {1.0, 0.0}},
      {{1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}},
      {{0.0, 1.0}, {1.0, 0.0}, {1.0, 0.0}},
      {{-1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}},
  };
  for (int e = 0; e < 4; ++e) {
    for (int g = 0; g < 4; ++g) {
      const double s = kG4[g], w = kW4[g];
      const Eigen::Vector2d v = field(edges[e].p0 + s * edges[e].dir);
      const double vt = v.dot(edges[e].tan);
      dofs(2 * e) += w * vt;
      dofs(2 * e + 1) += w * vt * s;
    }
  }
  const auto& q = quad_rule_q33();
  for (int g = 0; g < q.points.rows(); ++g) {
    const Eigen::Vector2d xi = q.points.row(g);
    const double w = q.weights(g);
    const Eigen::Vector2d v = field(xi);
    dofs(8) += w * v.x();
    dofs(9) += w * v.x() * xi.x();
    dofs(10) += w * v.y();
    dofs(11) += w * v.y() * xi.y();
  }
  return dofs;
}

const QuadratureRule& quad_rule_q33() {
  static const QuadratureRule rule = [] {
    QuadratureRule r;
    const double p[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    const double w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    r.points.resize(9, 2);
    r.weights.resize(9);
    int k = 0;
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i, ++k) {
        r.points(k, 0) = p[i];
        r.points(k, 1) = p[j];
        r.weights(k) = w[i] * w[j];
      }
    return r;
  }();
  return rule;
}

const QuadratureRule& quad_rule_t6() {
  static const QuadratureRule rule = [] {
    QuadratureRule r;
    const double a = 0.445948490915965;
    const double b = 0.091576213509771;
    const double wa = 0.111690794839005;
    const double wb = 0.054975871827661;
    r.points.resize(6, 2);
    r.weights.resize(6);
    const double pts[6][2] = {{a, a},      {1 - 2 * a, a}, {a, 1 - 2 * a},
                              {b, b},      {1 - 2 * b, b}, {b, 1 - 2 * b}};
    const double ws[6] = {wa, wa, wa, wb, wb, wb};
    for (int k = 0; k < 6; ++k) {
      r.points(k, 0) = pts[k][0];
      r.points(k, 1) = pts[k][1];
      r.weights(k) = ws[k];
    }
    return r;
  }();
  return rule;
}

const QuadratureRule& quad_rule_edge3() {
  static const QuadratureRule rule = [] {
    QuadratureRule r;
    const double p[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    const double w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    r.points.resize(3, 2);
    r.weights.resize(3);
    for (int k = 0; k < 3; ++k) {
      r.points(k, 0) = p[k];
      r.points(k, 1) = 0.0;
      r.weights(k) = w[k];
    }
    return r;
  }();
  return rule;
}

}  // namespace rmfit
