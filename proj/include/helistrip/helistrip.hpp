#pragma once

#include "errors.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "heun.hpp"
#include "numerov.hpp"
#include "parallel.hpp"
#include "report.hpp"
#include "stability.hpp"
#include "transverse.hpp"
#include "tridiagonal.hpp"
#include "units.hpp"
