#pragma once

#include "bingham/mesh.hpp"
#include "bingham/quadrature.hpp"
#include "bingham/spaces.hpp"
#include "bingham/assembly.hpp"
#include "bingham/linsolve.hpp"
#include "bingham/fixed_point.hpp"
#include "bingham/anderson.hpp"
#include "bingham/problems.hpp"
#include "bingham/analysis.hpp"
#include "bingham/config.hpp"
#include "bingham/experiment.hpp"
#include "bingham/runtime.hpp"
