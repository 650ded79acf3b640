#pragma once

// Umbrella header (the CLI layer is separate: dmin/cli.hpp).

#include "dmin/catalog.hpp"
#include "dmin/error.hpp"
#include "dmin/expr.hpp"
#include "dmin/geometry.hpp"
#include "dmin/minkowski.hpp"
#include "dmin/numeric.hpp"
#include "dmin/reconstruct.hpp"
#include "dmin/singular.hpp"
#include "dmin/weierstrass.hpp"
