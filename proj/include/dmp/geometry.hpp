#pragma once

#include "dmp/geometry/chamfer.hpp"
#include "dmp/geometry/io.hpp"
#include "dmp/geometry/kdtree.hpp"
#include "dmp/geometry/marching_cubes.hpp"
#include "dmp/geometry/normals.hpp"
#include "dmp/geometry/sampling.hpp"
#include "dmp/geometry/shapes.hpp"
#include "dmp/geometry/types.hpp"
