#pragma once

#include "rkjl/analysis.hpp"
#include "rkjl/error.hpp"
#include "rkjl/experiment.hpp"
#include "rkjl/harness.hpp"
#include "rkjl/linalg.hpp"
#include "rkjl/matrix_io.hpp"
#include "rkjl/random.hpp"
#include "rkjl/sampling.hpp"
#include "rkjl/sketch.hpp"
#include "rkjl/solvers.hpp"
#include "rkjl/svg.hpp"
#include "rkjl/system.hpp"
