#pragma once

#include <stdexcept>
#include <string>

namespace dpg_heat {

/// Invalid user input or inconsistent configuration (bad n, wrong vector size, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: Cholesky breakdown, residual not reached, degenerate element.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DPG_HEAT_REQUIRE(cond, ExceptionType, msg) \
  do {                                             \
    if (!(cond)) throw ExceptionType(msg);         \
  } while (0)

}  // namespace dpg_heat
