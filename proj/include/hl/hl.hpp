#pragma once

#include "hl/exact.hpp"
#include "hl/parallel.hpp"
#include "hl/triangle_geometry.hpp"
#include "hl/holder_functions.hpp"
#include "hl/levelset.hpp"
#include "hl/dimension_bounds.hpp"
#include "hl/separated_cantor.hpp"
#include "hl/serialize.hpp"
