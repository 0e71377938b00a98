#pragma once

/**
 * @file fe_spaces.hpp
 * @brief Trial dof numbering, local trial/test bases, and the P1 / RT0 lifts
 *        of the skeleton unknowns.
 *
 * Trial space per element K:
 *   u     : P0 or P1 (discontinuous), basis {1} or {1, s, t}
 *   sigma : [P0]^2, basis {e_x, e_y}
 *   u_hat : continuous P1 on the skeleton, zero on the boundary (one dof per interior vertex)
 *   s_hat : P0 per edge, flux w.r.t. the canonical edge normal (one dof per edge)
 *
 * Enriched test space per element: v in P2 (6 functions), tau in [P3]^2 (20).
 * Local test index r < 6 is (v_r, 0), r >= 6 is (0, tau_{r-6}).
 *
 * All local polynomials are monomials in the scaled coordinates
 * s = (x - x_c) / d, t = (y - y_c) / d with x_c the centroid and d the diameter.
 */

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpg_heat/errors.hpp"
#include "dpg_heat/mesh.hpp"
#include "dpg_heat/quadrature.hpp"

namespace dpg_heat {

inline constexpr int kScalarTestDim = 6;
inline constexpr int kVectorTestDim = 20;
inline constexpr int kTestDim = kScalarTestDim + kVectorTestDim;

struct TrialConfig {
  int u_degree = 0;

  int u_dofs_per_element() const { return u_degree == 0 ? 1 : 3; }
  void validate() const {
    DPG_HEAT_REQUIRE(u_degree == 0 || u_degree == 1, ConfigError, "u_degree must be 0 or 1");
  }
};

// ---------------------------------------------------------------------------
// Element geometry

struct ElementGeometry {
  std::array<Point, 3> vertex;
  double area = 0.0;
  Point centroid;
  double diameter = 0.0;

  static ElementGeometry from(const std::array<Point, 3>& p) {
    ElementGeometry g;
    g.vertex = p;
    const Vec2 a = p[1] - p[0];
    const Vec2 b = p[2] - p[0];
    g.area = 0.5 * (a.x * b.y - a.y * b.x);
    DPG_HEAT_REQUIRE(g.area > 0.0 && std::isfinite(g.area), SolverError,
                     "degenerate or clockwise element (area " + std::to_string(g.area) + ")");
    g.centroid = (1.0 / 3.0) * (p[0] + p[1] + p[2]);
    g.diameter = std::max({norm(p[1] - p[0]), norm(p[2] - p[1]), norm(p[0] - p[2])});
    return g;
  }

  static ElementGeometry of(const Mesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    return from({mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]});
  }

  /// Physical point of reference coordinates (xi, eta).
  Point map(double xi, double eta) const {
    return vertex[0] + xi * (vertex[1] - vertex[0]) + eta * (vertex[2] - vertex[0]);
  }

  /// Endpoints of local edge i (opposite vertex i), in counter-clockwise order.
  std::pair<Point, Point> edge(int i) const { return {vertex[(i + 1) % 3], vertex[(i + 2) % 3]}; }

  double edge_length(int i) const {
    const auto [a, b] = edge(i);
    return norm(b - a);
  }

  Vec2 outward_normal(int i) const {
    const auto [a, b] = edge(i);
    const Vec2 t = b - a;
    const double len = norm(t);
    return {t.y / len, -t.x / len};
  }

  std::array<double, 3> barycentric(Point x) const {
    const Vec2 a = vertex[1] - vertex[0];
    const Vec2 b = vertex[2] - vertex[0];
    const Vec2 r = x - vertex[0];
    const double inv = 1.0 / (2.0 * area);
    const double l1 = (r.x * b.y - r.y * b.x) * inv;
    const double l2 = (a.x * r.y - a.y * r.x) * inv;
    return {1.0 - l1 - l2, l1, l2};
  }

  /// Constant gradient of barycentric coordinate i.
  Vec2 barycentric_gradient(int i) const {
    const auto [a, b] = edge(i);
    const Vec2 t = b - a;
    return (1.0 / (2.0 * area)) * Vec2{-t.y, t.x};
  }

  std::array<double, 2> scaled(Point x) const {
    return {(x.x - centroid.x) / diameter, (x.y - centroid.y) / diameter};
  }
};

// ---------------------------------------------------------------------------
// Monomial bases

namespace detail {

/// Exponents (a, b) of s^a t^b ordered by total degree, then by decreasing a.
template <int Degree>
constexpr auto monomial_exponents() {
  std::array<std::array<int, 2>, (Degree + 1) * (Degree + 2) / 2> e{};
  int idx = 0;
  for (int p = 0; p <= Degree; ++p) {
    for (int a = p; a >= 0; --a) e[idx++] = {a, p - a};
  }
  return e;
}

inline double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace detail

/// Value and physical gradient of a monomial basis of total degree Degree.
template <int Degree>
struct MonomialBasis {
  static constexpr auto exponents = detail::monomial_exponents<Degree>();
  static constexpr int size = static_cast<int>(exponents.size());

  struct Values {
    std::array<double, size> value{};
    std::array<Vec2, size> grad{};
  };

  static Values eval(const ElementGeometry& g, Point x) {
    const auto [s, t] = g.scaled(x);
    Values out;
    for (int i = 0; i < size; ++i) {
      const auto [a, b] = exponents[i];
      out.value[i] = detail::ipow(s, a) * detail::ipow(t, b);
      const double ds = a > 0 ? a * detail::ipow(s, a - 1) * detail::ipow(t, b) : 0.0;
      const double dt = b > 0 ? b * detail::ipow(s, a) * detail::ipow(t, b - 1) : 0.0;
      out.grad[i] = {ds / g.diameter, dt / g.diameter};
    }
    return out;
  }
};

using ScalarTestBasis = MonomialBasis<2>;
using CubicBasis = MonomialBasis<3>;
static_assert(ScalarTestBasis::size == kScalarTestDim);
static_assert(2 * CubicBasis::size == kVectorTestDim);

/// Test vector function j: (m_j, 0) for j < 10, (0, m_{j-10}) otherwise.
struct VectorTestBasis {
  static constexpr int size = kVectorTestDim;

  struct Values {
    std::array<Vec2, size> value{};
    std::array<double, size> div{};
  };

  static Values eval(const ElementGeometry& g, Point x) {
    const auto m = CubicBasis::eval(g, x);
    Values out;
    for (int j = 0; j < CubicBasis::size; ++j) {
      out.value[j] = {m.value[j], 0.0};
      out.div[j] = m.grad[j].x;
      out.value[j + CubicBasis::size] = {0.0, m.value[j]};
      out.div[j + CubicBasis::size] = m.grad[j].y;
    }
    return out;
  }
};

/// Local u basis: {1} or {1, s, t}. Writes `count` values into out.
inline void eval_u_basis(const ElementGeometry& g, Point x, int u_degree, std::span<double> out) {
  out[0] = 1.0;
  if (u_degree == 1) {
    const auto [s, t] = g.scaled(x);
    out[1] = s;
    out[2] = t;
  }
}

inline double eval_u_field(const ElementGeometry& g, Point x, int u_degree, std::span<const double> coeffs) {
  std::array<double, 3> b{};
  eval_u_basis(g, x, u_degree, b);
  double v = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) v += coeffs[i] * b[i];
  return v;
}

// ---------------------------------------------------------------------------
// Quadrature tables mapped to a physical element

/// Test function values at the points of a triangle rule, weights scaled to K.
struct TestBasisTables {
  std::vector<Point> points;
  std::vector<double> weights;
  Eigen::MatrixXd v, dvx, dvy;     ///< n_points x 6
  Eigen::MatrixXd tx, ty, divtau;  ///< n_points x 20
};

inline TestBasisTables test_basis_tables(const ElementGeometry& g, const QuadratureRule& rule) {
  const int nq = static_cast<int>(rule.size());
  TestBasisTables tab;
  tab.points.resize(nq);
  tab.weights.resize(nq);
  tab.v.resize(nq, kScalarTestDim);
  tab.dvx.resize(nq, kScalarTestDim);
  tab.dvy.resize(nq, kScalarTestDim);
  tab.tx.resize(nq, kVectorTestDim);
  tab.ty.resize(nq, kVectorTestDim);
  tab.divtau.resize(nq, kVectorTestDim);
  for (int q = 0; q < nq; ++q) {
    const Point x = g.map(rule.points[q][0], rule.points[q][1]);
    tab.points[q] = x;
    tab.weights[q] = rule.weights[q] * 2.0 * g.area;
    const auto sv = ScalarTestBasis::eval(g, x);
    for (int i = 0; i < kScalarTestDim; ++i) {
      tab.v(q, i) = sv.value[i];
      tab.dvx(q, i) = sv.grad[i].x;
      tab.dvy(q, i) = sv.grad[i].y;
    }
    const auto vv = VectorTestBasis::eval(g, x);
    for (int j = 0; j < kVectorTestDim; ++j) {
      tab.tx(q, j) = vv.value[j].x;
      tab.ty(q, j) = vv.value[j].y;
      tab.divtau(q, j) = vv.div[j];
    }
  }
  return tab;
}

/// Physical points and weights of a triangle rule on K.
inline void map_rule(const ElementGeometry& g, const QuadratureRule& rule, std::vector<Point>& pts,
                     std::vector<double>& wts) {
  pts.resize(rule.size());
  wts.resize(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    pts[q] = g.map(rule.points[q][0], rule.points[q][1]);
    wts[q] = rule.weights[q] * 2.0 * g.area;
  }
}

// ---------------------------------------------------------------------------
// Dof map

struct DofMap {
  TrialConfig config;
  int n_u = 0, n_sigma = 0, n_uhat = 0, n_sigmahat = 0;
  int u_offset = 0, sigma_offset = 0, uhat_offset = 0, sigmahat_offset = 0;
  std::vector<int> uhat_of_vertex;  ///< block-local index, -1 on the boundary

  int total() const { return n_u + n_sigma + n_uhat + n_sigmahat; }
  int u_per_element() const { return config.u_dofs_per_element(); }

  int u_dof(int t, int i) const { return u_offset + t * u_per_element() + i; }
  int sigma_dof(int t, int c) const { return sigma_offset + 2 * t + c; }
  int uhat_dof(int v) const { return uhat_of_vertex[v] < 0 ? -1 : uhat_offset + uhat_of_vertex[v]; }
  int sigmahat_dof(int e) const { return sigmahat_offset + e; }
};

inline DofMap build_dof_map(const Mesh& mesh, TrialConfig config) {
  config.validate();
  DofMap map;
  map.config = config;
  const int F = static_cast<int>(mesh.num_triangles());
  map.n_u = config.u_dofs_per_element() * F;
  map.n_sigma = 2 * F;
  map.uhat_of_vertex.assign(mesh.num_vertices(), -1);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.interior_vertex[v]) map.uhat_of_vertex[v] = map.n_uhat++;
  }
  map.n_sigmahat = static_cast<int>(mesh.num_edges());
  map.u_offset = 0;
  map.sigma_offset = map.n_u;
  map.uhat_offset = map.sigma_offset + map.n_sigma;
  map.sigmahat_offset = map.uhat_offset + map.n_uhat;
  return map;
}

/// Column layout of the trial dofs touching one element.
struct ElementDofs {
  int n_u = 1;
  std::array<int, 3> uhat_col{-1, -1, -1};  ///< per local vertex; -1 when on the boundary
  std::array<int, 3> sigmahat_col{};        ///< per local edge
  std::array<int, 3> edge_sign{1, 1, 1};
  std::vector<int> global;                  ///< global dof of each local column

  int size() const { return static_cast<int>(global.size()); }
  int sigma_col(int c) const { return n_u + c; }
};

inline ElementDofs element_dofs(const Mesh& mesh, const DofMap& map, int t) {
  ElementDofs d;
  d.n_u = map.u_per_element();
  for (int i = 0; i < d.n_u; ++i) d.global.push_back(map.u_dof(t, i));
  d.global.push_back(map.sigma_dof(t, 0));
  d.global.push_back(map.sigma_dof(t, 1));
  for (int a = 0; a < 3; ++a) {
    const int dof = map.uhat_dof(mesh.triangles[t][a]);
    if (dof >= 0) {
      d.uhat_col[a] = d.size();
      d.global.push_back(dof);
    }
  }
  for (int i = 0; i < 3; ++i) {
    const EdgeRef ref = mesh.edge_of_triangle[t][i];
    d.sigmahat_col[i] = d.size();
    d.edge_sign[i] = ref.sign;
    d.global.push_back(map.sigmahat_dof(ref.edge));
  }
  return d;
}

/// Standalone layout for a single element with all vertices free (used by local tests).
inline ElementDofs free_element_dofs(int u_degree, std::array<int, 3> edge_sign = {1, 1, 1}) {
  ElementDofs d;
  d.n_u = u_degree == 0 ? 1 : 3;
  int col = d.n_u + 2;
  for (int a = 0; a < 3; ++a) d.uhat_col[a] = col++;
  for (int i = 0; i < 3; ++i) d.sigmahat_col[i] = col++;
  d.edge_sign = edge_sign;
  d.global.resize(col);
  for (int i = 0; i < col; ++i) d.global[i] = i;
  return d;
}

// ---------------------------------------------------------------------------
// Lifts of the skeleton unknowns

/// Continuous piecewise-linear function, zero on the boundary.
class P1Field {
 public:
  P1Field(const Mesh& mesh, std::vector<double> vertex_values)
      : mesh_(&mesh), values_(std::move(vertex_values)) {}

  double value(int t, Point x) const {
    const auto g = ElementGeometry::of(*mesh_, t);
    const auto lam = g.barycentric(x);
    const auto& tri = mesh_->triangles[t];
    return lam[0] * values_[tri[0]] + lam[1] * values_[tri[1]] + lam[2] * values_[tri[2]];
  }

  Vec2 gradient(int t) const {
    const auto g = ElementGeometry::of(*mesh_, t);
    const auto& tri = mesh_->triangles[t];
    Vec2 grad;
    for (int a = 0; a < 3; ++a) grad = grad + values_[tri[a]] * g.barycentric_gradient(a);
    return grad;
  }

  const std::vector<double>& vertex_values() const { return values_; }

 private:
  const Mesh* mesh_;
  std::vector<double> values_;
};

/// Nodal P1 extension of u_hat coefficients (one per interior vertex).
inline P1Field p1_lift(const Mesh& mesh, const DofMap& map, std::span<const double> uhat) {
  DPG_HEAT_REQUIRE(static_cast<int>(uhat.size()) == map.n_uhat, ConfigError,
                   "p1_lift: expected " + std::to_string(map.n_uhat) + " coefficients, got " +
                       std::to_string(uhat.size()));
  std::vector<double> values(mesh.num_vertices(), 0.0);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (map.uhat_of_vertex[v] >= 0) values[v] = uhat[map.uhat_of_vertex[v]];
  }
  return P1Field(mesh, std::move(values));
}

/// Elementwise a + c (x - x_c): the RT0 field with prescribed normal fluxes.
class RT0Field {
 public:
  struct Local {
    Vec2 a;
    double c = 0.0;
    Point centroid;
  };

  explicit RT0Field(std::vector<Local> local) : local_(std::move(local)) {}

  Vec2 value(int t, Point x) const {
    const auto& l = local_[t];
    return l.a + l.c * (x - l.centroid);
  }
  double divergence(int t) const { return 2.0 * local_[t].c; }
  const Local& local(int t) const { return local_[t]; }

 private:
  std::vector<Local> local_;
};

/// Lowest-order Raviart-Thomas field whose normal component on each edge
/// (w.r.t. the canonical normal) equals the given constant.
inline RT0Field rt0_lift(const Mesh& mesh, std::span<const double> fluxes) {
  DPG_HEAT_REQUIRE(fluxes.size() == mesh.num_edges(), ConfigError,
                   "rt0_lift: expected " + std::to_string(mesh.num_edges()) + " fluxes, got " +
                       std::to_string(fluxes.size()));
  std::vector<RT0Field::Local> local(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = ElementGeometry::of(mesh, static_cast<int>(t));
    // phi_i = |e_i| / (2|K|) (x - p_i) has unit normal component on edge i, zero on the others
    double c = 0.0;
    Vec2 shift;
    for (int i = 0; i < 3; ++i) {
      const EdgeRef ref = mesh.edge_of_triangle[t][i];
      const double coef = ref.sign * fluxes[ref.edge] * g.edge_length(i) / (2.0 * g.area);
      c += coef;
      shift = shift + coef * g.vertex[i];
    }
    local[t] = {c * g.centroid - shift, c, g.centroid};
  }
  return RT0Field(std::move(local));
}

}  // namespace dpg_heat
