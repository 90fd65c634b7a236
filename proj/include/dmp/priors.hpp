#pragma once

#include "dmp/priors/atlas.hpp"
#include "dmp/priors/fit.hpp"
#include "dmp/priors/levelset.hpp"
#include "dmp/priors/stretch.hpp"
#include "dmp/priors/topology.hpp"
