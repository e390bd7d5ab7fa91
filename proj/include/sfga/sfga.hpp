#pragma once

#include "sfga/random.hpp"
#include "sfga/stat.hpp"
#include "sfga/ga.hpp"
#include "sfga/penalty.hpp"
#include "sfga/geometry.hpp"
#include "sfga/feasibility.hpp"
#include "sfga/bspline.hpp"
#include "sfga/path.hpp"
#include "sfga/benchmarks.hpp"
#include "sfga/io.hpp"
