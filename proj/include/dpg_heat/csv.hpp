#pragma once

/**
 * @file csv.hpp
 * @brief CSV schemas written by the command-line driver.
 *
 * Error table header:
 *   n,h,k,N,dofs,err_u,err_sigma,err_hat_u,err_hat_sigma,err_u0,err_energy,stability_ratio,C_n,runtime_s
 * Stability table header:
 *   coupling,n,h,k,N,stability_ratio,max_step_ratio
 * Per-step diagnostics header:
 *   level,step,t,norm_u,norm_sigma,norm_f,field_norm,step_bound,cumulative_bound,step_ratio,cumulative_ratio,energy_norm
 *
 * Floats use 17 significant digits so every value parses back exactly.
 */

#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dpg_heat/error_analysis.hpp"
#include "dpg_heat/errors.hpp"

namespace dpg_heat::csv {

inline constexpr std::string_view kErrorHeader =
    "n,h,k,N,dofs,err_u,err_sigma,err_hat_u,err_hat_sigma,err_u0,err_energy,stability_ratio,C_n,runtime_s";
inline constexpr std::string_view kStabilityHeader = "coupling,n,h,k,N,stability_ratio,max_step_ratio";

inline constexpr std::string_view kStepsHeader =
    "level,step,t,norm_u,norm_sigma,norm_f,field_norm,step_bound,cumulative_bound,step_ratio,cumulative_ratio,"
    "energy_norm";

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string error_row(const ErrorReport& r) {
  std::ostringstream os;
  os << r.n << ',' << format_double(r.h) << ',' << format_double(r.k) << ',' << r.N << ',' << r.dofs;
  for (double v : {r.err_u, r.err_sigma, r.err_hat_u, r.err_hat_sigma, r.err_u0, r.err_energy, r.stability_ratio,
                   r.C_n, r.runtime_s}) {
    os << ',' << format_double(v);
  }
  return os.str();
}

inline std::string stability_row(const std::string& coupling, const ErrorReport& r) {
  std::ostringstream os;
  os << coupling << ',' << r.n << ',' << format_double(r.h) << ',' << format_double(r.k) << ',' << r.N << ','
     << format_double(r.stability_ratio) << ',' << format_double(r.max_step_ratio);
  return os.str();
}

inline std::string steps_row(int level, const StepDiagnostics& d) {
  std::ostringstream os;
  os << level << ',' << d.n;
  for (double v : {d.t, d.norm_u, d.norm_sigma, d.norm_f, d.field_norm, d.step_bound, d.cumulative_bound,
                   d.step_ratio(), d.cumulative_ratio(), d.energy_norm}) {
    os << ',' << format_double(v);
  }
  return os.str();
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Parses an error-table row back into a report (fields absent from the schema stay zero).
inline ErrorReport parse_error_row(std::string_view line) {
  const auto f = split(line);
  DPG_HEAT_REQUIRE(f.size() == 14, ConfigError, "error row must have 14 fields, got " + std::to_string(f.size()));
  ErrorReport r;
  try {
    r.n = std::stoi(f[0]);
    r.h = std::stod(f[1]);
    r.k = std::stod(f[2]);
    r.N = std::stoi(f[3]);
    r.dofs = std::stoi(f[4]);
    r.err_u = std::stod(f[5]);
    r.err_sigma = std::stod(f[6]);
    r.err_hat_u = std::stod(f[7]);
    r.err_hat_sigma = std::stod(f[8]);
    r.err_u0 = std::stod(f[9]);
    r.err_energy = std::stod(f[10]);
    r.stability_ratio = std::stod(f[11]);
    r.C_n = std::stod(f[12]);
    r.runtime_s = std::stod(f[13]);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("malformed error row: ") + e.what());
  }
  return r;
}

}  // namespace dpg_heat::csv
