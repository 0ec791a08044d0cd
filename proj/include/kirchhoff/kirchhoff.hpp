#pragma once

#include "kirchhoff/config.hpp"
#include "kirchhoff/error.hpp"
#include "kirchhoff/fd_newton.hpp"
#include "kirchhoff/functionals.hpp"
#include "kirchhoff/groundstate.hpp"
#include "kirchhoff/kirchhoff_coeff.hpp"
#include "kirchhoff/moser2d.hpp"
#include "kirchhoff/nonlinearity.hpp"
#include "kirchhoff/ode.hpp"
#include "kirchhoff/problem.hpp"
#include "kirchhoff/radial.hpp"
#include "kirchhoff/rescaling.hpp"
#include "kirchhoff/semiclassical.hpp"
