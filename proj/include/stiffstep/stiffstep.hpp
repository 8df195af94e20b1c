#pragma once

#include "stiffstep/baselines.hpp"
#include "stiffstep/errors.hpp"
#include "stiffstep/harness.hpp"
#include "stiffstep/linalg.hpp"
#include "stiffstep/model.hpp"
#include "stiffstep/newton.hpp"
#include "stiffstep/order_conditions.hpp"
#include "stiffstep/polynomial.hpp"
#include "stiffstep/problems.hpp"
#include "stiffstep/report.hpp"
#include "stiffstep/solvers.hpp"
#include "stiffstep/stability.hpp"
#include "stiffstep/tsfo.hpp"
