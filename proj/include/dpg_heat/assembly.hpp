#pragma once

/**
 * @file assembly.hpp
 * @brief Local Gram / trial-to-test / load matrices of the ultra-weak
 *        backward-Euler step, condensation to the normal equations, and the
 *        global SPD solve.
 *
 * Bilinear form on element K for trial (u, sigma, u_hat, s_hat) and test (v, tau):
 *
 *   b_e(u, v) = (1/k)(u, v) + (u, div tau) + (sigma, grad v + tau)
 *               - <u_hat, tau.n_K> - <s_hat, v>
 *
 * Test inner product:
 *
 *   (1/k^2)(v, w) + (1/k)(grad v, grad w) + (1/k)(tau, rho) + (div tau, div rho)
 *
 * With G_K the Gram matrix and B_K the rows of b_e, the optimal test functions
 * on K have coefficients G_K^{-1} B_K and the discrete scheme is the SPD system
 * sum_K B_K^T G_K^{-1} B_K x = sum_K B_K^T G_K^{-1} l_K.
 */

#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "dpg_heat/errors.hpp"
#include "dpg_heat/fe_spaces.hpp"
#include "dpg_heat/mesh.hpp"
#include "dpg_heat/parallel.hpp"
#include "dpg_heat/quadrature.hpp"

namespace dpg_heat {

inline constexpr int kAssemblyDegree = 7;
inline constexpr int kEdgeDegree = 5;
inline constexpr int kLoadDegree = 18;

using ScalarField = std::function<double(Point)>;

// ---------------------------------------------------------------------------
// Gram matrix

/// The four k-independent pieces of G_K (each kTestDim x kTestDim).
struct GramBlocks {
  Eigen::MatrixXd mass_v, stiff_v, mass_tau, div_tau;

  Eigen::MatrixXd combine(double k) const {
    return mass_v / (k * k) + stiff_v / k + mass_tau / k + div_tau;
  }
};

inline GramBlocks local_gram_blocks(const ElementGeometry& g) {
  const auto tab = test_basis_tables(g, triangle_rule(kAssemblyDegree));
  const Eigen::Map<const Eigen::VectorXd> w(tab.weights.data(), static_cast<Eigen::Index>(tab.weights.size()));
  const auto S = kScalarTestDim;
  const auto V = kVectorTestDim;
  GramBlocks b;
  for (auto* m : {&b.mass_v, &b.stiff_v, &b.mass_tau, &b.div_tau}) m->setZero(kTestDim, kTestDim);
  b.mass_v.topLeftCorner(S, S) = tab.v.transpose() * w.asDiagonal() * tab.v;
  b.stiff_v.topLeftCorner(S, S) =
      tab.dvx.transpose() * w.asDiagonal() * tab.dvx + tab.dvy.transpose() * w.asDiagonal() * tab.dvy;
  b.mass_tau.bottomRightCorner(V, V) =
      tab.tx.transpose() * w.asDiagonal() * tab.tx + tab.ty.transpose() * w.asDiagonal() * tab.ty;
  b.div_tau.bottomRightCorner(V, V) = tab.divtau.transpose() * w.asDiagonal() * tab.divtau;
  return b;
}

inline Eigen::MatrixXd local_gram(const ElementGeometry& g, double k) {
  DPG_HEAT_REQUIRE(k > 0.0, ConfigError, "time step k must be positive");
  return local_gram_blocks(g).combine(k);
}

// ---------------------------------------------------------------------------
// Trial-to-test matrix

/// Rows: the 26 local test functions. Columns: `dofs` layout (u, sigma, u_hat, s_hat).
inline Eigen::MatrixXd local_b(const ElementGeometry& g, double k, const ElementDofs& dofs) {
  DPG_HEAT_REQUIRE(k > 0.0, ConfigError, "time step k must be positive");
  DPG_HEAT_REQUIRE(dofs.n_u == 1 || dofs.n_u == 3, ConfigError, "local_b: element layout has invalid u block");
  const int m = dofs.size();
  const int u_degree = dofs.n_u == 1 ? 0 : 1;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(kTestDim, m);
  const auto S = kScalarTestDim;

  // volume terms
  const auto tab = test_basis_tables(g, triangle_rule(kAssemblyDegree));
  std::array<double, 3> ub{};
  for (std::size_t q = 0; q < tab.points.size(); ++q) {
    const double w = tab.weights[q];
    eval_u_basis(g, tab.points[q], u_degree, ub);
    for (int j = 0; j < dofs.n_u; ++j) {
      for (int r = 0; r < S; ++r) B(r, j) += w * ub[j] * tab.v(q, r) / k;
      for (int r = 0; r < kVectorTestDim; ++r) B(S + r, j) += w * ub[j] * tab.divtau(q, r);
    }
    const int sx = dofs.sigma_col(0), sy = dofs.sigma_col(1);
    for (int r = 0; r < S; ++r) {
      B(r, sx) += w * tab.dvx(q, r);
      B(r, sy) += w * tab.dvy(q, r);
    }
    for (int r = 0; r < kVectorTestDim; ++r) {
      B(S + r, sx) += w * tab.tx(q, r);
      B(S + r, sy) += w * tab.ty(q, r);
    }
  }

  // skeleton terms
  const auto erule = edge_rule(kEdgeDegree);
  for (int i = 0; i < 3; ++i) {
    const auto [a, b] = g.edge(i);
    const double len = g.edge_length(i);
    const Vec2 n = g.outward_normal(i);
    const int va = (i + 1) % 3, vb = (i + 2) % 3;
    for (std::size_t q = 0; q < erule.size(); ++q) {
      const double s = erule.points[q][0];
      const double w = erule.weights[q] * len;
      const Point x = a + s * (b - a);
      const auto sv = ScalarTestBasis::eval(g, x);
      const auto vv = VectorTestBasis::eval(g, x);
      // -<s_hat, v>: s_hat is the canonical flux, the element sees sign * s_hat
      const int col = dofs.sigmahat_col[i];
      for (int r = 0; r < S; ++r) B(r, col) -= dofs.edge_sign[i] * w * sv.value[r];
      // -<u_hat, tau.n>: u_hat is linear along the edge, lambda_a = 1 - s, lambda_b = s
      const std::array<std::pair<int, double>, 2> hats{{{va, 1.0 - s}, {vb, s}}};
      for (const auto& [vertex, lam] : hats) {
        const int c = dofs.uhat_col[vertex];
        if (c < 0) continue;
        for (int r = 0; r < kVectorTestDim; ++r) B(S + r, c) -= w * lam * dot(vv.value[r], n);
      }
    }
  }
  return B;
}

// ---------------------------------------------------------------------------
// Load vector

/// l_K = (f + u_prev / k, v) on the scalar rows; the tau rows are zero.
inline Eigen::VectorXd local_load(const ElementGeometry& g, double k, const ScalarField& f,
                                  std::span<const double> u_prev, int u_degree) {
  Eigen::VectorXd l = Eigen::VectorXd::Zero(kTestDim);
  const auto rule = triangle_rule(kLoadDegree);
  std::vector<Point> pts;
  std::vector<double> wts;
  map_rule(g, rule, pts, wts);
  for (std::size_t q = 0; q < pts.size(); ++q) {
    double data = f ? f(pts[q]) : 0.0;
    if (!u_prev.empty()) data += eval_u_field(g, pts[q], u_degree, u_prev) / k;
    if (data == 0.0) continue;
    const auto sv = ScalarTestBasis::eval(g, pts[q]);
    for (int r = 0; r < kScalarTestDim; ++r) l(r) += wts[q] * data * sv.value[r];
  }
  return l;
}

// ---------------------------------------------------------------------------
// Condensation

struct LocalSystem {
  Eigen::MatrixXd G;  ///< kTestDim x kTestDim
  Eigen::MatrixXd B;  ///< kTestDim x m
  Eigen::VectorXd l;  ///< kTestDim
};

struct CondensedSystem {
  Eigen::MatrixXd matrix;  ///< B^T G^{-1} B
  Eigen::VectorXd rhs;     ///< B^T G^{-1} l
};

inline Eigen::LLT<Eigen::MatrixXd> factor_gram(const Eigen::MatrixXd& G) {
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  DPG_HEAT_REQUIRE(llt.info() == Eigen::Success, SolverError,
                   "Gram matrix is not positive definite (degenerate element or bad quadrature)");
  return llt;
}

inline CondensedSystem condense(const LocalSystem& sys) {
  const auto llt = factor_gram(sys.G);
  const Eigen::MatrixXd theta = llt.solve(sys.B);
  CondensedSystem out;
  out.matrix = sys.B.transpose() * theta;
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  out.rhs = theta.transpose() * sys.l;
  return out;
}

// ---------------------------------------------------------------------------
// Global system

/// Per-element data reused across time steps (the mesh and k are fixed).
struct ElementOperator {
  ElementGeometry geom;
  ElementDofs dofs;
  Eigen::MatrixXd B;
  Eigen::LLT<Eigen::MatrixXd> gram;
  Eigen::MatrixXd theta;  ///< G^{-1} B: coefficients of the optimal test functions

  Eigen::VectorXd gather(const Eigen::VectorXd& x) const {
    Eigen::VectorXd xl(dofs.size());
    for (int i = 0; i < dofs.size(); ++i) xl(i) = x(dofs.global[i]);
    return xl;
  }

  /// r^T G^{-1} r for a functional given by its values on the local test basis.
  double dual_norm_squared(const Eigen::VectorXd& r) const { return r.dot(gram.solve(r)); }
};

class DpgSystem {
 public:
  /// `element_order` permutes the accumulation order (empty: natural order).
  DpgSystem(const Mesh& mesh, const DofMap& map, double k, int threads = 1,
            std::vector<int> element_order = {})
      : mesh_(&mesh), map_(&map), k_(k), order_(std::move(element_order)) {
    DPG_HEAT_REQUIRE(k > 0.0, ConfigError, "time step k must be positive");
    const int F = static_cast<int>(mesh.num_triangles());
    if (order_.empty()) {
      order_.resize(F);
      std::iota(order_.begin(), order_.end(), 0);
    }
    DPG_HEAT_REQUIRE(static_cast<int>(order_.size()) == F, ConfigError, "element order has wrong length");
    threads_ = resolve_threads(threads);

    elements_.resize(F);
    parallel_for(F, threads_, [&](int t) {
      auto& e = elements_[t];
      e.geom = ElementGeometry::of(mesh, t);
      e.dofs = element_dofs(mesh, map, t);
      e.B = local_b(e.geom, k, e.dofs);
      e.gram = factor_gram(local_gram(e.geom, k));
      e.theta = e.gram.solve(e.B);
    });

    std::vector<Eigen::Triplet<double>> trip;
    for (int t : order_) {
      const auto& e = elements_[t];
      Eigen::MatrixXd A = e.B.transpose() * e.theta;
      for (int i = 0; i < e.dofs.size(); ++i) {
        for (int j = 0; j < e.dofs.size(); ++j) {
          trip.emplace_back(e.dofs.global[i], e.dofs.global[j], 0.5 * (A(i, j) + A(j, i)));
        }
      }
    }
    const int n = map.total();
    matrix_.resize(n, n);
    matrix_.setFromTriplets(trip.begin(), trip.end());
    solver_.compute(matrix_);
    DPG_HEAT_REQUIRE(solver_.info() == Eigen::Success, SolverError,
                     "Cholesky factorization of the condensed system failed (singular system: dof map bug?)");
  }

  double k() const { return k_; }
  const Mesh& mesh() const { return *mesh_; }
  const DofMap& dof_map() const { return *map_; }
  const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }
  const ElementOperator& element(int t) const { return elements_[t]; }
  int num_elements() const { return static_cast<int>(elements_.size()); }

  /// l_K for every element; `u_prev` is the global u block (may be empty).
  std::vector<Eigen::VectorXd> element_loads(const ScalarField& f, std::span<const double> u_prev) const {
    const int F = num_elements();
    const int nu = map_->u_per_element();
    DPG_HEAT_REQUIRE(u_prev.empty() || static_cast<int>(u_prev.size()) == map_->n_u, ConfigError,
                     "previous u field has wrong size");
    std::vector<Eigen::VectorXd> loads(F);
    parallel_for(F, threads_, [&](int t) {
      const auto local = u_prev.empty() ? std::span<const double>{} : u_prev.subspan(t * nu, nu);
      loads[t] = local_load(elements_[t].geom, k_, f, local, map_->config.u_degree);
    });
    return loads;
  }

  Eigen::VectorXd rhs(const std::vector<Eigen::VectorXd>& loads) const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(map_->total());
    for (int t : order_) {
      const auto& e = elements_[t];
      const Eigen::VectorXd r = e.theta.transpose() * loads[t];
      for (int i = 0; i < e.dofs.size(); ++i) b(e.dofs.global[i]) += r(i);
    }
    return b;
  }

  /// Direct solve with iterative refinement to a relative residual of 1e-12.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = solver_.solve(b);
    DPG_HEAT_REQUIRE(solver_.info() == Eigen::Success, SolverError, "sparse Cholesky solve failed");
    const double bnorm = b.norm();
    if (bnorm == 0.0) return x;
    for (int it = 0; it < 5; ++it) {
      const Eigen::VectorXd res = b - matrix_ * x;
      last_relative_residual_ = res.norm() / bnorm;
      if (last_relative_residual_ <= 1e-12) return x;
      x += solver_.solve(res);
    }
    last_relative_residual_ = (b - matrix_ * x).norm() / bnorm;
    DPG_HEAT_REQUIRE(last_relative_residual_ <= 1e-12, SolverError,
                     "relative residual " + std::to_string(last_relative_residual_) + " above 1e-12");
    return x;
  }

  double last_relative_residual() const { return last_relative_residual_; }

  /// sum_K (l_K - B_K x)^T G_K^{-1} (l_K - B_K x): the quantity the scheme minimizes.
  double residual_squared(const Eigen::VectorXd& x, const std::vector<Eigen::VectorXd>& loads) const {
    double sum = 0.0;
    for (int t : order_) {
      const auto& e = elements_[t];
      sum += e.dual_norm_squared(loads[t] - e.B * e.gather(x));
    }
    return sum;
  }

  /// Energy norm in the enriched test space: (sum_K (B_K w)^T G_K^{-1} (B_K w))^{1/2}.
  double energy_norm(const Eigen::VectorXd& w) const {
    DPG_HEAT_REQUIRE(w.size() == map_->total(), ConfigError, "energy_norm: vector has wrong size");
    double sum = 0.0;
    for (int t : order_) {
      const auto& e = elements_[t];
      sum += e.dual_norm_squared(e.B * e.gather(w));
    }
    return std::sqrt(sum);
  }

 private:
  const Mesh* mesh_;
  const DofMap* map_;
  double k_;
  std::vector<int> order_;
  int threads_ = 1;
  std::vector<ElementOperator> elements_;
  Eigen::SparseMatrix<double> matrix_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> solver_;
  mutable double last_relative_residual_ = 0.0;
};

/// One-shot assembly and solve; `u_prev` is the global u block (may be empty).
inline Eigen::VectorXd assemble_and_solve(const Mesh& mesh, const DofMap& map, double k, const ScalarField& f,
                                          std::span<const double> u_prev, int threads = 1) {
  const DpgSystem sys(mesh, map, k, threads);
  return sys.solve(sys.rhs(sys.element_loads(f, u_prev)));
}

inline double energy_norm(const DpgSystem& sys, const Eigen::VectorXd& w) { return sys.energy_norm(w); }

// ---------------------------------------------------------------------------
// Test-norm evaluation for given (broken) functions

struct TestPair {
  std::function<double(Point)> v;
  std::function<Vec2(Point)> grad_v;
  std::function<Vec2(Point)> tau;
  std::function<double(Point)> div_tau;
};

/// ||(v, tau)||_Y^2 = (1/k^2)||v||^2 + (1/k)||grad v||^2 + (1/k)||tau||^2 + ||div tau||^2.
inline double y_norm_squared(const Mesh& mesh, double k, const TestPair& p, int degree = kMaxQuadratureDegree) {
  const auto rule = triangle_rule(degree);
  std::vector<Point> pts;
  std::vector<double> wts;
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    map_rule(ElementGeometry::of(mesh, static_cast<int>(t)), rule, pts, wts);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double v = p.v(pts[q]);
      const Vec2 gv = p.grad_v(pts[q]);
      const Vec2 tau = p.tau(pts[q]);
      const double dt = p.div_tau(pts[q]);
      sum += wts[q] * (v * v / (k * k) + dot(gv, gv) / k + dot(tau, tau) / k + dt * dt);
    }
  }
  return sum;
}

}  // namespace dpg_heat
