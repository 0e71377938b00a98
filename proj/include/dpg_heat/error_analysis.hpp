#pragma once

/**
 * @file error_analysis.hpp
 * @brief Errors at the final time, stability ratio, quasi-optimality constant,
 *        and log-log rate fits.
 *
 * Error quantities (all at T, k the step size):
 *   err_u         ||u(T) - u_h||
 *   err_sigma     sqrt(k) ||grad u(T) - sigma_h||
 *   err_hat_u     (||u(T) - P1(u_hat)||^2 + k ||grad(u(T) - P1(u_hat))||^2)^{1/2}
 *   err_hat_sigma sqrt(k) (||grad u(T) - RT0(s_hat)||^2 + k ||Lap u(T) - div RT0(s_hat)||^2)^{1/2}
 *   err_u0        ||u0 - u0_h||
 *   err_energy    energy norm of the error, in the enriched test space
 *
 * The two trace errors are computable upper bounds of the weighted trace norms
 * (their infima are replaced by the P1 / RT0 lifts).
 */

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dpg_heat/assembly.hpp"
#include "dpg_heat/errors.hpp"
#include "dpg_heat/exact_solutions.hpp"
#include "dpg_heat/fe_spaces.hpp"
#include "dpg_heat/time_stepper.hpp"

namespace dpg_heat {

struct FieldErrors {
  double err_u = 0.0;
  double err_sigma = 0.0;
};

struct TraceErrors {
  double err_hat_u = 0.0;
  double err_hat_sigma = 0.0;
};

struct ErrorReport {
  int n = 0;
  double h = 0.0;
  double k = 0.0;
  int N = 0;
  int dofs = 0;
  double err_u = 0.0;
  double err_sigma = 0.0;
  double err_hat_u = 0.0;
  double err_hat_sigma = 0.0;
  double err_u0 = 0.0;
  double err_energy = 0.0;
  double stability_ratio = 0.0;
  double x2_bound = 0.0;  ///< (err_u^2 + err_sigma^2 + err_hat_u^2 + err_hat_sigma^2)^{1/2}
  double C_n = 0.0;
  double runtime_s = 0.0;
  double max_step_ratio = 0.0;  ///< max over steps of the per-step stability ratio
};

/// Poincare-Friedrichs constant of the unit square, 1 / sqrt(2 pi^2).
inline constexpr double kPoincareFriedrichsUnitSquare = 1.0 / (std::numbers::pi * std::numbers::sqrt2);

/// sqrt2 * max{1, sqrt(4 C_PF^2 + 6k)}.
inline double cea_constant(double k, double c_pf = kPoincareFriedrichsUnitSquare) {
  DPG_HEAT_REQUIRE(k > 0.0, ConfigError, "cea_constant: k must be positive");
  return std::numbers::sqrt2 * std::max(1.0, std::sqrt(4.0 * c_pf * c_pf + 6.0 * k));
}

inline FieldErrors field_errors(const Mesh& mesh, const DofMap& map, const StepState& state,
                                const ExactSolution& exact, double T, double k) {
  const int nu = map.u_per_element();
  const auto u = state.u_block(map);
  const auto sigma = state.sigma_block(map);
  const auto rule = triangle_rule(kErrorDegree);
  std::vector<Point> pts;
  std::vector<double> wts;
  double eu = 0.0, es = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = ElementGeometry::of(mesh, static_cast<int>(t));
    map_rule(g, rule, pts, wts);
    const Vec2 sh{sigma[2 * t], sigma[2 * t + 1]};
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double du = exact.u(pts[q], T) - eval_u_field(g, pts[q], map.config.u_degree, u.subspan(t * nu, nu));
      const Vec2 ds = exact.grad_u(pts[q], T) - sh;
      eu += wts[q] * du * du;
      es += wts[q] * dot(ds, ds);
    }
  }
  return {std::sqrt(eu), std::sqrt(k * es)};
}

inline TraceErrors trace_errors(const Mesh& mesh, const DofMap& map, const StepState& state,
                                const ExactSolution& exact, double T, double k) {
  const auto uh = p1_lift(mesh, map, state.uhat_block(map));
  const auto sh = rt0_lift(mesh, state.sigmahat_block(map));
  const auto rule = triangle_rule(kErrorDegree);
  std::vector<Point> pts;
  std::vector<double> wts;
  double u_l2 = 0.0, u_h1 = 0.0, s_l2 = 0.0, s_div = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const int ti = static_cast<int>(t);
    const auto g = ElementGeometry::of(mesh, ti);
    map_rule(g, rule, pts, wts);
    const Vec2 grad_lift = uh.gradient(ti);
    const double div_lift = sh.divergence(ti);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const Point x = pts[q];
      const double du = exact.u(x, T) - uh.value(ti, x);
      const Vec2 grad = exact.grad_u(x, T);
      const Vec2 dg = grad - grad_lift;
      const Vec2 dsig = grad - sh.value(ti, x);
      const double ddiv = exact.laplacian(x, T) - div_lift;
      u_l2 += wts[q] * du * du;
      u_h1 += wts[q] * dot(dg, dg);
      s_l2 += wts[q] * dot(dsig, dsig);
      s_div += wts[q] * ddiv * ddiv;
    }
  }
  return {std::sqrt(u_l2 + k * u_h1), std::sqrt(k) * std::sqrt(s_l2 + k * s_div)};
}

/// Dual norm of r(v) = (f(T) - u_t(T) + u(T)/k, v) - b_e(w, v) over the enriched test space.
inline double energy_error(const DpgSystem& sys, const Eigen::VectorXd& w, const ExactSolution& exact, double T) {
  const double k = sys.k();
  const auto rule = triangle_rule(kErrorDegree);
  std::vector<Point> pts;
  std::vector<double> wts;
  double sum = 0.0;
  for (int t = 0; t < sys.num_elements(); ++t) {
    const auto& e = sys.element(t);
    Eigen::VectorXd r = -(e.B * e.gather(w));
    map_rule(e.geom, rule, pts, wts);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double data = exact.f(pts[q], T) - exact.dudt(pts[q], T) + exact.u(pts[q], T) / k;
      const auto sv = ScalarTestBasis::eval(e.geom, pts[q]);
      for (int i = 0; i < kScalarTestDim; ++i) r(i) += wts[q] * data * sv.value[i];
    }
    sum += e.dual_norm_squared(r);
  }
  return std::sqrt(sum);
}

inline double initial_error(const Mesh& mesh, const DofMap& map, const Eigen::VectorXd& u0_h,
                            const ExactSolution& exact) {
  const int nu = map.u_per_element();
  const auto rule = triangle_rule(kErrorDegree);
  std::vector<Point> pts;
  std::vector<double> wts;
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = ElementGeometry::of(mesh, static_cast<int>(t));
    map_rule(g, rule, pts, wts);
    const std::span<const double> c(u0_h.data() + t * nu, nu);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double d = exact.u0(pts[q]) - eval_u_field(g, pts[q], map.config.u_degree, c);
      sum += wts[q] * d * d;
    }
  }
  return std::sqrt(sum);
}

/// (||u_h^N||^2 + k ||sigma_h^N||^2)^{1/2} / (||u0|| + k sum_n ||f^n||).
inline double stability_ratio(const RunResult& run) {
  const auto& mesh = run.stepper->mesh();
  const auto& map = run.stepper->dof_map();
  const double k = run.config.grid.k;
  const double nu = u_field_norm(mesh, map, run.final_state.u_block(map));
  const double ns = sigma_field_norm(mesh, run.final_state.sigma_block(map));
  const double num = std::sqrt(nu * nu + k * ns * ns);
  return run.cumulative_bound > 0.0 ? num / run.cumulative_bound : 0.0;
}

/// Final cumulative ratio from per-step diagnostics.
inline double stability_ratio(std::span<const StepDiagnostics> steps) {
  return steps.empty() ? 0.0 : steps.back().cumulative_ratio();
}

inline double max_step_ratio(std::span<const StepDiagnostics> steps) {
  double m = 0.0;
  for (const auto& s : steps) m = std::max(m, s.step_ratio());
  return m;
}

inline ErrorReport compute_error_report(const RunResult& run) {
  const auto& stepper = *run.stepper;
  const auto& mesh = stepper.mesh();
  const auto& map = stepper.dof_map();
  const auto& exact = run.config.exact;
  const double T = run.config.grid.T;
  const double k = run.config.grid.k;

  ErrorReport r;
  r.n = run.config.n;
  r.h = mesh_size(mesh);
  r.k = k;
  r.N = run.config.grid.N;
  r.dofs = map.total();
  const auto fe = field_errors(mesh, map, run.final_state, exact, T, k);
  const auto te = trace_errors(mesh, map, run.final_state, exact, T, k);
  r.err_u = fe.err_u;
  r.err_sigma = fe.err_sigma;
  r.err_hat_u = te.err_hat_u;
  r.err_hat_sigma = te.err_hat_sigma;
  r.err_u0 = initial_error(mesh, map, run.u0_h, exact);
  r.err_energy = energy_error(stepper.system(), run.final_state.x, exact, T);
  r.stability_ratio = stability_ratio(run);
  r.x2_bound = std::sqrt(r.err_u * r.err_u + r.err_sigma * r.err_sigma + r.err_hat_u * r.err_hat_u +
                         r.err_hat_sigma * r.err_hat_sigma);
  r.C_n = cea_constant(k);
  r.runtime_s = run.runtime_s;
  r.max_step_ratio = max_step_ratio(run.steps);
  return r;
}

// ---------------------------------------------------------------------------
// Rates

struct RateFit {
  double slope = 0.0;      ///< least-squares slope of log(err) against log(h)
  double intercept = 0.0;  ///< log-space intercept
  std::vector<double> pairwise;  ///< log(e_i / e_{i+1}) / log(h_i / h_{i+1})
  bool monotone = true;          ///< errors decrease with h
};

inline RateFit convergence_rates(std::span<const double> h, std::span<const double> err) {
  DPG_HEAT_REQUIRE(h.size() == err.size(), ConfigError, "convergence_rates: h and err differ in length");
  DPG_HEAT_REQUIRE(h.size() >= 3, ConfigError, "convergence_rates: need at least 3 refinement levels");
  const std::size_t m = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    DPG_HEAT_REQUIRE(h[i] > 0.0 && err[i] > 0.0, ConfigError, "convergence_rates: values must be positive");
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  RateFit fit;
  const double denom = m * sxx - sx * sx;
  DPG_HEAT_REQUIRE(denom > 0.0, ConfigError, "convergence_rates: mesh sizes must differ");
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / m;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    fit.pairwise.push_back(std::log(err[i] / err[i + 1]) / std::log(h[i] / h[i + 1]));
    const bool finer = h[i + 1] < h[i];
    if (finer ? err[i + 1] > err[i] : err[i + 1] < err[i]) fit.monotone = false;
  }
  return fit;
}

}  // namespace dpg_heat
