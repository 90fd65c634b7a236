#pragma once

#include "dmp/nn/adam.hpp"
#include "dmp/nn/gradcheck.hpp"
#include "dmp/nn/init.hpp"
#include "dmp/nn/layers.hpp"
#include "dmp/nn/network.hpp"
#include "dmp/nn/tensor.hpp"
