#pragma once

#include "panelfield/csv.hpp"
#include "panelfield/error.hpp"
#include "panelfield/geometry.hpp"
#include "panelfield/kernel.hpp"
#include "panelfield/oracle.hpp"
#include "panelfield/parallel.hpp"
#include "panelfield/quadrature.hpp"
#include "panelfield/solver.hpp"
