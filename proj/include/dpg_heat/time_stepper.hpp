#pragma once

/**
 * @file time_stepper.hpp
 * @brief Backward-Euler DPG iteration: L2 projection of u0, then one condensed
 *        solve per time step with f evaluated at the new time.
 */

#include <chrono>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dpg_heat/assembly.hpp"
#include "dpg_heat/errors.hpp"
#include "dpg_heat/exact_solutions.hpp"
#include "dpg_heat/fe_spaces.hpp"
#include "dpg_heat/mesh.hpp"
#include "dpg_heat/quadrature.hpp"

namespace dpg_heat {

inline constexpr int kErrorDegree = 10;

/// Coefficients of (u, sigma, u_hat, s_hat) at step n. At n = 0 only the u block is set.
struct StepState {
  int n = 0;
  double t = 0.0;
  Eigen::VectorXd x;

  std::span<const double> u_block(const DofMap& map) const {
    return {x.data() + map.u_offset, static_cast<std::size_t>(map.n_u)};
  }
  std::span<const double> sigma_block(const DofMap& map) const {
    return {x.data() + map.sigma_offset, static_cast<std::size_t>(map.n_sigma)};
  }
  std::span<const double> uhat_block(const DofMap& map) const {
    return {x.data() + map.uhat_offset, static_cast<std::size_t>(map.n_uhat)};
  }
  std::span<const double> sigmahat_block(const DofMap& map) const {
    return {x.data() + map.sigmahat_offset, static_cast<std::size_t>(map.n_sigmahat)};
  }
};

struct StepDiagnostics {
  int n = 0;
  double t = 0.0;
  double norm_u = 0.0;            ///< ||u_h^n||
  double norm_sigma = 0.0;        ///< ||sigma_h^n||
  double norm_f = 0.0;            ///< ||f(t_n)||
  double field_norm = 0.0;        ///< (||u_h^n||^2 + k ||sigma_h^n||^2)^{1/2}
  double step_bound = 0.0;        ///< ||u_h^{n-1}|| + k ||f^n||
  double cumulative_bound = 0.0;  ///< ||u0|| + k sum_{m<=n} ||f^m||
  double energy_norm = 0.0;       ///< enriched energy norm of the discrete solution

  double step_ratio() const { return step_bound > 0.0 ? field_norm / step_bound : 0.0; }
  double cumulative_ratio() const { return cumulative_bound > 0.0 ? field_norm / cumulative_bound : 0.0; }
};

// ---------------------------------------------------------------------------
// Norms of discrete and exact fields

inline double l2_norm(const Mesh& mesh, const ScalarField& g, int degree = kErrorDegree) {
  const auto rule = triangle_rule(degree);
  std::vector<Point> pts;
  std::vector<double> wts;
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    map_rule(ElementGeometry::of(mesh, static_cast<int>(t)), rule, pts, wts);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double v = g(pts[q]);
      sum += wts[q] * v * v;
    }
  }
  return std::sqrt(sum);
}

inline double u_field_norm(const Mesh& mesh, const DofMap& map, std::span<const double> u) {
  const int nu = map.u_per_element();
  const auto rule = triangle_rule(2);
  std::vector<Point> pts;
  std::vector<double> wts;
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = ElementGeometry::of(mesh, static_cast<int>(t));
    map_rule(g, rule, pts, wts);
    const auto c = u.subspan(t * nu, nu);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double v = eval_u_field(g, pts[q], map.config.u_degree, c);
      sum += wts[q] * v * v;
    }
  }
  return std::sqrt(sum);
}

inline double sigma_field_norm(const Mesh& mesh, std::span<const double> sigma) {
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    sum += mesh.triangle_area(static_cast<int>(t)) * (sigma[2 * t] * sigma[2 * t] + sigma[2 * t + 1] * sigma[2 * t + 1]);
  }
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// Initial projection

/// Elementwise L2 projection of u0 onto P0 or P1 (the u block).
inline Eigen::VectorXd project_initial(const Mesh& mesh, const DofMap& map, const std::function<double(Point)>& u0) {
  const int nu = map.u_per_element();
  const int deg = map.config.u_degree;
  Eigen::VectorXd out(map.n_u);
  const auto rule = triangle_rule(kErrorDegree);
  std::vector<Point> pts;
  std::vector<double> wts;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = ElementGeometry::of(mesh, static_cast<int>(t));
    map_rule(g, rule, pts, wts);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nu, nu);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(nu);
    std::array<double, 3> phi{};
    for (std::size_t q = 0; q < pts.size(); ++q) {
      eval_u_basis(g, pts[q], deg, phi);
      const double val = u0(pts[q]);
      for (int i = 0; i < nu; ++i) {
        b(i) += wts[q] * val * phi[i];
        for (int j = 0; j < nu; ++j) M(i, j) += wts[q] * phi[i] * phi[j];
      }
    }
    out.segment(static_cast<Eigen::Index>(t) * nu, nu) = M.llt().solve(b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stepper

struct RunConfig {
  int n = 8;  ///< mesh subdivisions per side
  TimeGrid grid{0.1, 1, 0.1};
  TrialConfig trial;
  ExactSolution exact = example1();
  bool diagnostics = true;
  int threads = 1;

  void validate() const {
    DPG_HEAT_REQUIRE(n >= 1, ConfigError, "mesh subdivisions must be >= 1");
    DPG_HEAT_REQUIRE(grid.T > 0.0 && grid.N >= 1 && grid.k > 0.0, ConfigError, "invalid time grid");
    DPG_HEAT_REQUIRE(std::abs(grid.k * grid.N - grid.T) <= 1e-14 * std::max(1.0, grid.T), ConfigError,
                     "time grid requires k * N == T");
    trial.validate();
    DPG_HEAT_REQUIRE(static_cast<bool>(exact.f) && static_cast<bool>(exact.u0), ConfigError,
                     "exact solution must provide f and u0");
  }
};

/// Owns the mesh, dof map, and the factorized step operator (k is constant).
class TimeStepper {
 public:
  TimeStepper(int n, TrialConfig trial, double k, int threads = 1)
      : mesh_(std::make_unique<Mesh>(build_uniform_mesh(n))),
        map_(std::make_unique<DofMap>(build_dof_map(*mesh_, trial))),
        system_(std::make_unique<DpgSystem>(*mesh_, *map_, k, threads)) {}

  const Mesh& mesh() const { return *mesh_; }
  const DofMap& dof_map() const { return *map_; }
  const DpgSystem& system() const { return *system_; }
  double k() const { return system_->k(); }

  StepState initial_state(const std::function<double(Point)>& u0) const {
    StepState s;
    s.x = Eigen::VectorXd::Zero(map_->total());
    s.x.segment(map_->u_offset, map_->n_u) = project_initial(*mesh_, *map_, u0);
    return s;
  }

  /// One backward-Euler step; f is evaluated at the new time n k.
  StepState step(const StepState& prev, const std::function<double(Point, double)>& f) const {
    StepState next;
    next.n = prev.n + 1;
    next.t = next.n * k();
    const double t = next.t;
    const ScalarField f_now = [&f, t](Point p) { return f(p, t); };
    const auto loads = system_->element_loads(f_now, prev.u_block(*map_));
    next.x = system_->solve(system_->rhs(loads));
    return next;
  }

 private:
  std::unique_ptr<Mesh> mesh_;
  std::unique_ptr<DofMap> map_;
  std::unique_ptr<DpgSystem> system_;
};

struct RunResult {
  std::shared_ptr<const TimeStepper> stepper;
  RunConfig config;
  Eigen::VectorXd u0_h;  ///< projected initial datum (u block)
  StepState final_state;
  std::vector<StepDiagnostics> steps;
  double norm_u0 = 0.0;         ///< ||u0|| of the exact datum
  double cumulative_bound = 0.0;  ///< ||u0|| + k sum ||f^n||
  double runtime_s = 0.0;
};

inline RunResult run(const RunConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunResult res;
  res.config = config;
  auto stepper = std::make_shared<TimeStepper>(config.n, config.trial, config.grid.k, config.threads);
  const Mesh& mesh = stepper->mesh();
  const DofMap& map = stepper->dof_map();
  const double k = config.grid.k;

  StepState state = stepper->initial_state(config.exact.u0);
  res.u0_h = state.x.segment(map.u_offset, map.n_u);
  res.norm_u0 = l2_norm(mesh, config.exact.u0);
  double cumulative = res.norm_u0;
  double prev_norm_u = u_field_norm(mesh, map, state.u_block(map));

  for (int n = 1; n <= config.grid.N; ++n) {
    state = stepper->step(state, config.exact.f);
    if (n == config.grid.N) state.t = config.grid.T;
    const double t = state.t;
    const double norm_f = l2_norm(mesh, [&](Point p) { return config.exact.f(p, t); });
    cumulative += k * norm_f;
    const double norm_u = u_field_norm(mesh, map, state.u_block(map));
    if (config.diagnostics) {
      StepDiagnostics d;
      d.n = n;
      d.t = t;
      d.norm_u = norm_u;
      d.norm_sigma = sigma_field_norm(mesh, state.sigma_block(map));
      d.norm_f = norm_f;
      d.field_norm = std::sqrt(norm_u * norm_u + k * d.norm_sigma * d.norm_sigma);
      d.step_bound = prev_norm_u + k * norm_f;
      d.cumulative_bound = cumulative;
      d.energy_norm = stepper->system().energy_norm(state.x);
      res.steps.push_back(d);
    }
    prev_norm_u = norm_u;
  }
  res.final_state = std::move(state);
  res.cumulative_bound = cumulative;
  res.stepper = std::move(stepper);
  res.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace dpg_heat
