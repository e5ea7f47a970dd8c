#pragma once

#include "rtcurved/errors.hpp"
#include "rtcurved/geometry.hpp"
#include "rtcurved/quadrature.hpp"
#include "rtcurved/mesh.hpp"
#include "rtcurved/spaces.hpp"
#include "rtcurved/assembly.hpp"
#include "rtcurved/solvers.hpp"
#include "rtcurved/experiments.hpp"
#include "rtcurved/selftest.hpp"
