// Umbrella header.
#pragma once

#include "dln/adaptivity.hpp"
#include "dln/coefficients.hpp"
#include "dln/contractivity.hpp"
#include "dln/diagnostics.hpp"
#include "dln/drivers.hpp"
#include "dln/linalg.hpp"
#include "dln/newton.hpp"
#include "dln/ode_problem.hpp"
#include "dln/rng.hpp"
#include "dln/stepper.hpp"
