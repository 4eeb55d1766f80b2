#pragma once

#include <parex/bench.hpp>
#include <parex/controller.hpp>
#include <parex/errors.hpp>
#include <parex/extrapolation.hpp>
#include <parex/linalg.hpp>
#include <parex/ode.hpp>
#include <parex/problems.hpp>
#include <parex/scheduler.hpp>
#include <parex/solvers.hpp>
#include <parex/steppers.hpp>
