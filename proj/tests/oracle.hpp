#pragma once

// Independent reference computations for the element matrices. Nothing here
// goes through the library's quadrature, geometry or basis code: nodes come
// from Boost.Math, basis functions are spelled out by hand.

#include <array>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

namespace oracle {

using P = std::array<double, 2>;

struct TriPoint {
  P x;
  double w;
};

/// 12x12 collapsed Gauss rule on the physical triangle (exact to degree 22).
inline std::vector<TriPoint> triangle_points(const std::array<P, 3>& v) {
  using G = boost::math::quadrature::gauss<double, 12>;
  std::vector<double> nodes, weights;
  // Boost stores non-negative abscissas on [-1, 1]; unfold them
  const auto& a = G::abscissa();
  const auto& w = G::weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    nodes.push_back(0.5 * (1 + a[i]));
    weights.push_back(0.5 * w[i]);
    if (a[i] != 0.0) {
      nodes.push_back(0.5 * (1 - a[i]));
      weights.push_back(0.5 * w[i]);
    }
  }
  const double det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[1][1] - v[0][1]) * (v[2][0] - v[0][0]);
  std::vector<TriPoint> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const double xi = nodes[i] * (1 - nodes[j]), eta = nodes[j];
      const double wt = weights[i] * weights[j] * (1 - nodes[j]) * det;
      out.push_back({{v[0][0] + xi * (v[1][0] - v[0][0]) + eta * (v[2][0] - v[0][0]),
                      v[0][1] + xi * (v[1][1] - v[0][1]) + eta * (v[2][1] - v[0][1])},
                     wt});
    }
  }
  return out;
}

/// 12-point Gauss rule on [0, 1].
inline std::vector<std::pair<double, double>> segment_points() {
  using G = boost::math::quadrature::gauss<double, 12>;
  std::vector<std::pair<double, double>> out;
  const auto& a = G::abscissa();
  const auto& w = G::weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.push_back({0.5 * (1 + a[i]), 0.5 * w[i]});
    if (a[i] != 0.0) out.push_back({0.5 * (1 - a[i]), 0.5 * w[i]});
  }
  return out;
}

struct Frame {
  double cx, cy, d;
  std::array<P, 3> v;
};

inline Frame frame(const std::array<P, 3>& v) {
  Frame f;
  f.v = v;
  f.cx = (v[0][0] + v[1][0] + v[2][0]) / 3;
  f.cy = (v[0][1] + v[1][1] + v[2][1]) / 3;
  double d = 0;
  for (int i = 0; i < 3; ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % 3];
    d = std::max(d, std::hypot(b[0] - a[0], b[1] - a[1]));
  }
  f.d = d;
  return f;
}

// scalar test functions: 1, s, t, s^2, s t, t^2 with gradients (w.r.t. x, y)
inline void scalar_test(const Frame& f, P x, double* val, double* gx, double* gy) {
  const double s = (x[0] - f.cx) / f.d, t = (x[1] - f.cy) / f.d, id = 1 / f.d;
  const double v[6] = {1, s, t, s * s, s * t, t * t};
  const double ds[6] = {0, 1, 0, 2 * s, t, 0};
  const double dt[6] = {0, 0, 1, 0, s, 2 * t};
  for (int i = 0; i < 6; ++i) {
    val[i] = v[i];
    gx[i] = ds[i] * id;
    gy[i] = dt[i] * id;
  }
}

// cubic monomials 1, s, t, s^2, st, t^2, s^3, s^2 t, s t^2, t^3 with derivatives
inline void cubic(const Frame& f, P x, double* val, double* gx, double* gy) {
  const double s = (x[0] - f.cx) / f.d, t = (x[1] - f.cy) / f.d, id = 1 / f.d;
  const double v[10] = {1, s, t, s * s, s * t, t * t, s * s * s, s * s * t, s * t * t, t * t * t};
  const double ds[10] = {0, 1, 0, 2 * s, t, 0, 3 * s * s, 2 * s * t, t * t, 0};
  const double dt[10] = {0, 0, 1, 0, s, 2 * t, 0, s * s, 2 * s * t, 3 * t * t};
  for (int i = 0; i < 10; ++i) {
    val[i] = v[i];
    gx[i] = ds[i] * id;
    gy[i] = dt[i] * id;
  }
}

/// Values of all 26 test functions: (v, dv/dx, dv/dy, tau_x, tau_y, div tau).
struct TestValues {
  double v[26] = {}, vx[26] = {}, vy[26] = {}, tx[26] = {}, ty[26] = {}, div[26] = {};
};

inline TestValues test_values(const Frame& f, P x) {
  TestValues out;
  scalar_test(f, x, out.v, out.vx, out.vy);
  double c[10], cx[10], cy[10];
  cubic(f, x, c, cx, cy);
  for (int j = 0; j < 10; ++j) {
    out.tx[6 + j] = c[j];
    out.div[6 + j] = cx[j];
    out.ty[16 + j] = c[j];
    out.div[16 + j] = cy[j];
  }
  return out;
}

inline Eigen::MatrixXd gram(const std::array<P, 3>& v, double k) {
  const auto f = frame(v);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(26, 26);
  for (const auto& q : triangle_points(v)) {
    const auto tv = test_values(f, q.x);
    for (int i = 0; i < 26; ++i) {
      for (int j = 0; j < 26; ++j) {
        G(i, j) += q.w * (tv.v[i] * tv.v[j] / (k * k) + (tv.vx[i] * tv.vx[j] + tv.vy[i] * tv.vy[j]) / k +
                          (tv.tx[i] * tv.tx[j] + tv.ty[i] * tv.ty[j]) / k + tv.div[i] * tv.div[j]);
      }
    }
  }
  return G;
}

/// A discrete trial function on one element.
struct Trial {
  std::vector<double> u;         ///< 1 or 3 coefficients (basis 1, s, t)
  double sx = 0, sy = 0;         ///< constant sigma
  std::array<double, 3> uhat{};  ///< vertex values (zero where not a dof)
  std::array<double, 3> shat{};  ///< canonical edge fluxes (already multiplied by the element sign)
};

inline double trial_u(const Frame& f, const Trial& w, P x) {
  double val = w.u[0];
  if (w.u.size() == 3) val += w.u[1] * (x[0] - f.cx) / f.d + w.u[2] * (x[1] - f.cy) / f.d;
  return val;
}

/// b_e(w, phi_r) for all 26 test functions by direct integration of each term.
inline Eigen::VectorXd bilinear_rows(const std::array<P, 3>& v, double k, const Trial& w) {
  const auto f = frame(v);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(26);
  for (const auto& q : triangle_points(v)) {
    const auto tv = test_values(f, q.x);
    const double u = trial_u(f, w, q.x);
    for (int i = 0; i < 26; ++i) {
      r(i) += q.w * (u * tv.v[i] / k + u * tv.div[i] + w.sx * (tv.vx[i] + tv.tx[i]) + w.sy * (tv.vy[i] + tv.ty[i]));
    }
  }
  for (int e = 0; e < 3; ++e) {
    const auto a = v[(e + 1) % 3], b = v[(e + 2) % 3];
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    const double nx = (b[1] - a[1]) / len, ny = -(b[0] - a[0]) / len;
    for (const auto& [s, ws] : segment_points()) {
      const P x{a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])};
      const auto tv = test_values(f, x);
      const double uh = (1 - s) * w.uhat[(e + 1) % 3] + s * w.uhat[(e + 2) % 3];
      for (int i = 0; i < 26; ++i) {
        r(i) -= ws * len * (uh * (tv.tx[i] * nx + tv.ty[i] * ny) + w.shat[e] * tv.v[i]);
      }
    }
  }
  return r;
}

/// (g, v_r) for the six scalar rows; tau rows zero.
inline Eigen::VectorXd load(const std::array<P, 3>& v, const std::function<double(P)>& g) {
  const auto f = frame(v);
  Eigen::VectorXd l = Eigen::VectorXd::Zero(26);
  for (const auto& q : triangle_points(v)) {
    const auto tv = test_values(f, q.x);
    const double val = g(q.x);
    for (int i = 0; i < 6; ++i) l(i) += q.w * val * tv.v[i];
  }
  return l;
}

// ---------------------------------------------------------------------------
// Dense global least-squares problem on a small mesh

/// Element-local sign of the canonical flux on local edge i (from vertex ids only).
template <class Tri>
int edge_sign(const Tri& tri, int i) {
  return tri[(i + 1) % 3] < tri[(i + 2) % 3] ? -1 : 1;
}

/// Stacked rows l - B x of every element, with block-diagonal Gram matrix.
struct DenseProblem {
  Eigen::MatrixXd B, G;
  Eigen::VectorXd l;

  double residual(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd r = l - B * x;
    return r.dot(G.llt().solve(r));
  }

  /// Minimizer of the Gram-weighted residual by whitening and QR.
  Eigen::VectorXd least_squares() const {
    const Eigen::LLT<Eigen::MatrixXd> llt(G);
    const Eigen::MatrixXd A = llt.matrixL().solve(B);
    const Eigen::VectorXd b = llt.matrixL().solve(l);
    return A.colPivHouseholderQr().solve(b);
  }
};

/// `data(t, x)` is the scalar right-hand side on element t (f + u_prev / k).
template <class MeshT, class MapT>
DenseProblem dense_problem(const MeshT& mesh, const MapT& map, double k,
                           const std::function<double(int, P)>& data) {
  const int F = static_cast<int>(mesh.triangles.size());
  const int n = map.total();
  const int nu = map.u_per_element();
  DenseProblem p;
  p.B = Eigen::MatrixXd::Zero(26 * F, n);
  p.G = Eigen::MatrixXd::Zero(26 * F, 26 * F);
  p.l = Eigen::VectorXd::Zero(26 * F);
  for (int t = 0; t < F; ++t) {
    const auto& tri = mesh.triangles[t];
    std::array<P, 3> v;
    for (int a = 0; a < 3; ++a) v[a] = {mesh.vertices[tri[a]].x, mesh.vertices[tri[a]].y};
    p.G.block(26 * t, 26 * t, 26, 26) = gram(v, k);
    p.l.segment(26 * t, 26) = load(v, [&](P x) { return data(t, x); });
    for (int j = 0; j < n; ++j) {
      Trial w;
      w.u.assign(nu, 0.0);
      bool touches = false;
      for (int i = 0; i < nu; ++i) {
        if (map.u_dof(t, i) == j) w.u[i] = 1, touches = true;
      }
      if (map.sigma_dof(t, 0) == j) w.sx = 1, touches = true;
      if (map.sigma_dof(t, 1) == j) w.sy = 1, touches = true;
      for (int a = 0; a < 3; ++a) {
        if (map.uhat_dof(tri[a]) == j) w.uhat[a] = 1, touches = true;
      }
      for (int i = 0; i < 3; ++i) {
        if (map.sigmahat_dof(mesh.edge_of_triangle[t][i].edge) == j) w.shat[i] = edge_sign(tri, i), touches = true;
      }
      if (touches) p.B.block(26 * t, j, 26, 1) = bilinear_rows(v, k, w);
    }
  }
  return p;
}

}  // namespace oracle
