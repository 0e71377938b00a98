#pragma once

/**
 * @file cli.hpp
 * @brief Command-line driver: `run`, `converge` and `stability` subcommands
 *        writing the CSV tables of csv.hpp.
 *
 * Exit codes: 0 success, 1 configuration error, 2 solver failure,
 * 3 a --check criterion failed.
 */

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpg_heat/csv.hpp"
#include "dpg_heat/error_analysis.hpp"
#include "dpg_heat/errors.hpp"
#include "dpg_heat/parallel.hpp"
#include "dpg_heat/study.hpp"

namespace dpg_heat::cli {

enum ExitCode : int { kOk = 0, kConfig = 1, kSolver = 2, kCheckFailed = 3 };

inline constexpr double kStabilityTolerance = 1e-8;
inline constexpr double kBoundSlack = 1e-6;

struct CliOptions {
  std::string subcommand;
  int example = 1;
  std::vector<int> levels{4, 8, 16, 32};
  std::optional<int> n;
  std::string coupling = "sqrt";
  std::optional<double> c;
  double T = 0.1;
  int u_degree = 0;
  int series_terms = 1000;
  std::string out;
  std::string steps_out;
  int threads = 1;
  bool check = false;
  bool parallel_levels = false;

  std::vector<int> effective_levels() const {
    if (n) return {*n};
    if (subcommand == "run") return {levels.front()};
    return levels;
  }
  double coupling_constant() const { return c ? *c : default_coupling_constant(example); }

  void validate() const {
    DPG_HEAT_REQUIRE(example == 1 || example == 2, ConfigError, "--example must be 1 or 2");
    DPG_HEAT_REQUIRE(!levels.empty(), ConfigError, "--levels must not be empty");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      DPG_HEAT_REQUIRE(levels[i] >= 1, ConfigError, "--levels entries must be >= 1");
      DPG_HEAT_REQUIRE(i == 0 || levels[i] > levels[i - 1], ConfigError, "--levels must be sorted ascending");
    }
    DPG_HEAT_REQUIRE(!n || *n >= 1, ConfigError, "--n must be >= 1");
    DPG_HEAT_REQUIRE(coupling_constant() > 0.0 && std::isfinite(coupling_constant()), ConfigError,
                     "--c must be positive");
    DPG_HEAT_REQUIRE(T > 0.0 && std::isfinite(T), ConfigError, "--T must be positive");
    DPG_HEAT_REQUIRE(u_degree == 0 || u_degree == 1, ConfigError, "--u-degree must be 0 or 1");
    DPG_HEAT_REQUIRE(series_terms >= 1, ConfigError, "--terms must be >= 1");
    parse_coupling(coupling);
  }
};

namespace detail {

inline LevelSpec level_spec(const CliOptions& o, int n, Coupling coupling) {
  LevelSpec s;
  s.example = o.example;
  s.n = n;
  s.coupling = coupling;
  s.c = o.coupling_constant();
  s.T = o.T;
  s.u_degree = o.u_degree;
  s.series_terms = o.series_terms;
  s.threads = o.threads;
  return s;
}

/// Runs one level and names it in any error message.
inline LevelResult run_named_level(const LevelSpec& spec) {
  const std::string tag = "level n=" + std::to_string(spec.n) + " (" + to_string(spec.coupling) + "): ";
  try {
    return run_level(spec);
  } catch (const ConfigError& e) {
    throw ConfigError(tag + e.what());
  } catch (const SolverError& e) {
    throw SolverError(tag + e.what());
  } catch (const std::bad_alloc&) {
    throw SolverError(tag + "out of memory");
  }
}

inline std::vector<LevelResult> run_levels(const CliOptions& o, Coupling coupling, std::ostream& log) {
  const auto levels = o.effective_levels();
  std::vector<LevelResult> results(levels.size());
  if (o.parallel_levels) {
    parallel_for(static_cast<int>(levels.size()), static_cast<int>(levels.size()),
                 [&](int i) { results[i] = run_named_level(level_spec(o, levels[i], coupling)); });
  } else {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      results[i] = run_named_level(level_spec(o, levels[i], coupling));
      const auto& r = results[i].report;
      log << "  " << to_string(coupling) << " n=" << r.n << " N=" << r.N << " err_u=" << r.err_u
          << " (" << r.runtime_s << " s)\n";
    }
  }
  return results;
}

class Checker {
 public:
  explicit Checker(std::ostream& log) : log_(log) {}

  void expect(bool ok, const std::string& what) {
    log_ << "check " << (ok ? "PASS" : "FAIL") << ": " << what << '\n';
    all_ &= ok;
  }
  bool all() const { return all_; }

  void row_bounds(const ErrorReport& r, const std::string& tag) {
    const double field = r.err_u * r.err_u + r.err_sigma * r.err_sigma;
    expect(field <= r.err_energy * r.err_energy * (1 + kBoundSlack), tag + " field errors bounded by energy error");
    expect(r.err_energy <= std::sqrt(3.0) * r.x2_bound * (1 + kBoundSlack), tag + " energy error <= sqrt3 * X2");
    stability(r, tag);
  }

  void stability(const ErrorReport& r, const std::string& tag) {
    expect(std::isfinite(r.stability_ratio) && r.stability_ratio >= 0.0 &&
               r.stability_ratio <= 1 + kStabilityTolerance && r.max_step_ratio <= 1 + kStabilityTolerance,
           tag + " stability ratio " + csv::format_double(r.stability_ratio) + ", max per-step " +
               csv::format_double(r.max_step_ratio));
  }

 private:
  std::ostream& log_;
  bool all_ = true;
};

inline std::vector<double> column(const std::vector<LevelResult>& rs, double ErrorReport::*field) {
  std::vector<double> out;
  for (const auto& r : rs) out.push_back(r.report.*field);
  return out;
}

/// Writes to --out when given, else to `fallback`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      DPG_HEAT_REQUIRE(file_.good(), ConfigError, "cannot open output file '" + path + "'");
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

inline int run_errors(const CliOptions& o, std::ostream& out, std::ostream& log) {
  const Coupling coupling = parse_coupling(o.coupling);
  const auto results = run_levels(o, coupling, log);

  Sink sink(o.out, out);
  sink.stream() << csv::kErrorHeader << '\n';
  for (const auto& r : results) sink.stream() << csv::error_row(r.report) << '\n';
  sink.stream().flush();

  if (!o.steps_out.empty()) {
    Sink steps(o.steps_out, out);
    steps.stream() << csv::kStepsHeader << '\n';
    for (const auto& r : results) {
      for (const auto& d : r.steps) steps.stream() << csv::steps_row(r.report.n, d) << '\n';
    }
  }

  if (results.size() >= 3) {
    const auto h = column(results, &ErrorReport::h);
    const auto fu = convergence_rates(h, column(results, &ErrorReport::err_u));
    const auto fs = convergence_rates(h, column(results, &ErrorReport::err_sigma));
    log << "fitted slopes: err_u " << fu.slope << ", err_sigma " << fs.slope << '\n';
  }
  if (!o.check) return kOk;

  Checker check(log);
  for (const auto& r : results) check.row_bounds(r.report, "n=" + std::to_string(r.report.n) + ":");
  if (results.size() >= 3) {
    const auto h = column(results, &ErrorReport::h);
    const double su = convergence_rates(h, column(results, &ErrorReport::err_u)).slope;
    if (o.u_degree == 0) {
      const double ss = convergence_rates(h, column(results, &ErrorReport::err_sigma)).slope;
      check.expect(su >= 0.35 && su <= 0.65, "err_u slope " + csv::format_double(su) + " in [0.35, 0.65]");
      check.expect(ss >= 0.35 && ss <= 0.65, "err_sigma slope " + csv::format_double(ss) + " in [0.35, 0.65]");
    } else {
      check.expect(su >= 0.55, "err_u slope " + csv::format_double(su) + " >= 0.55");
    }
  }
  return check.all() ? kOk : kCheckFailed;
}

inline int run_stability(const CliOptions& o, std::ostream& out, std::ostream& log) {
  Sink sink(o.out, out);
  sink.stream() << csv::kStabilityHeader << '\n';
  Checker check(log);
  for (Coupling coupling : {Coupling::Linear, Coupling::Sqrt}) {
    for (const auto& r : run_levels(o, coupling, log)) {
      sink.stream() << csv::stability_row(to_string(coupling), r.report) << '\n';
      check.stability(r.report, to_string(coupling) + " n=" + std::to_string(r.report.n) + ":");
    }
  }
  return !o.check || check.all() ? kOk : kCheckFailed;
}

inline void add_common_options(CLI::App* app, CliOptions& o) {
  app->add_option("--example", o.example, "Example problem (1: smooth, 2: rough initial datum)");
  app->add_option("--levels", o.levels, "Mesh levels n (h = sqrt2 / n), ascending")->delimiter(',');
  app->add_option("--n", o.n, "Single mesh level (overrides --levels)");
  app->add_option("--c", o.c, "Coupling constant (default 1/20 for example 1, 1/10 for example 2)");
  app->add_option("--T", o.T, "Final time");
  app->add_option("--u-degree", o.u_degree, "Polynomial degree of the u field (0 or 1)");
  app->add_option("--terms", o.series_terms, "Series terms for example 2");
  app->add_option("--out", o.out, "CSV output path (default: stdout)");
  app->add_option("--threads", o.threads, "Worker threads (DPG_HEAT_THREADS overrides)");
  app->add_flag("--check", o.check, "Verify the stability and error bounds; exit 3 on failure");
  app->add_flag("--parallel-levels", o.parallel_levels, "Run levels concurrently");
}

}  // namespace detail

/// Entry point used by the executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CliOptions o;
  CLI::App app{"Backward-Euler DPG solver for the heat equation on the unit square", "dpg_heat"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Single level: one error-table row");
  auto* conv_cmd = app.add_subcommand("converge", "Convergence study: one error-table row per level");
  auto* stab_cmd = app.add_subcommand("stability", "Stability ratios for the linear and sqrt couplings");
  for (auto* cmd : {run_cmd, conv_cmd, stab_cmd}) detail::add_common_options(cmd, o);
  for (auto* cmd : {run_cmd, conv_cmd}) {
    cmd->add_option("--coupling", o.coupling, "k-h coupling: sqrt (k = c h^1/2), linear (k = c h), two-thirds");
    cmd->add_option("--steps-out", o.steps_out, "Per-step diagnostics CSV path");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    o.subcommand = app.get_subcommands().front()->get_name();
    o.validate();
    if (o.subcommand == "stability") return detail::run_stability(o, out, err);
    return detail::run_errors(o, out, err);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolver;
  }
}

}  // namespace dpg_heat::cli
