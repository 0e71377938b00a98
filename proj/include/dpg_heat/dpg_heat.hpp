#pragma once

#include "dpg_heat/assembly.hpp"
#include "dpg_heat/csv.hpp"
#include "dpg_heat/error_analysis.hpp"
#include "dpg_heat/errors.hpp"
#include "dpg_heat/exact_solutions.hpp"
#include "dpg_heat/fe_spaces.hpp"
#include "dpg_heat/mesh.hpp"
#include "dpg_heat/quadrature.hpp"
#include "dpg_heat/study.hpp"
#include "dpg_heat/time_stepper.hpp"
