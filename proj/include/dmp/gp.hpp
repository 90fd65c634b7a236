#pragma once

#include "dmp/gp/curves.hpp"
#include "dmp/gp/kernels.hpp"
#include "dmp/gp/monte_carlo.hpp"
#include "dmp/gp/prior_samples.hpp"
#include "dmp/gp/stats.hpp"
