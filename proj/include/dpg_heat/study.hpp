#pragma once

/**
 * @file study.hpp
 * @brief One refinement level of an experiment: mesh n, step size from a
 *        k-h coupling, full run, and error report.
 */

#include <cmath>
#include <string>
#include <vector>

#include "dpg_heat/error_analysis.hpp"
#include "dpg_heat/errors.hpp"
#include "dpg_heat/exact_solutions.hpp"
#include "dpg_heat/mesh.hpp"
#include "dpg_heat/time_stepper.hpp"

namespace dpg_heat {

enum class Coupling {
  Linear,     ///< k = c h
  Sqrt,       ///< k = c h^{1/2}
  TwoThirds,  ///< k = c h^{2/3}
};

inline std::string to_string(Coupling c) {
  switch (c) {
    case Coupling::Linear: return "linear";
    case Coupling::Sqrt: return "sqrt";
    case Coupling::TwoThirds: return "two-thirds";
  }
  return "?";
}

inline Coupling parse_coupling(const std::string& s) {
  if (s == "linear") return Coupling::Linear;
  if (s == "sqrt") return Coupling::Sqrt;
  if (s == "two-thirds") return Coupling::TwoThirds;
  throw ConfigError("unknown coupling '" + s + "' (expected linear, sqrt, two-thirds)");
}

inline double coupled_step(Coupling coupling, double c, double h) {
  DPG_HEAT_REQUIRE(c > 0.0, ConfigError, "coupling constant c must be positive");
  switch (coupling) {
    case Coupling::Linear: return c * h;
    case Coupling::Sqrt: return c * std::sqrt(h);
    case Coupling::TwoThirds: return c * std::cbrt(h * h);
  }
  return c * h;
}

/// Default c: 1/20 for example 1, 1/10 for example 2.
inline double default_coupling_constant(int example) { return example == 2 ? 0.1 : 0.05; }

struct LevelSpec {
  int example = 1;
  int n = 4;
  Coupling coupling = Coupling::Sqrt;
  double c = 0.05;
  double T = 0.1;
  int u_degree = 0;
  int series_terms = 1000;
  int threads = 1;
};

struct LevelResult {
  ErrorReport report;
  std::vector<StepDiagnostics> steps;
};

inline RunConfig make_run_config(const LevelSpec& spec) {
  DPG_HEAT_REQUIRE(spec.n >= 1, ConfigError, "level n must be >= 1");
  DPG_HEAT_REQUIRE(spec.T > 0.0, ConfigError, "final time T must be positive");
  RunConfig cfg;
  cfg.n = spec.n;
  const double h = std::numbers::sqrt2 / spec.n;
  cfg.grid = time_grid_from_step(spec.T, coupled_step(spec.coupling, spec.c, h));
  cfg.trial.u_degree = spec.u_degree;
  cfg.exact = example_by_id(spec.example, spec.series_terms);
  cfg.threads = spec.threads;
  return cfg;
}

inline LevelResult run_level(const LevelSpec& spec) {
  const auto result = run(make_run_config(spec));
  return {compute_error_report(result), result.steps};
}

}  // namespace dpg_heat
