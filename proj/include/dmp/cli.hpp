#pragma once

#include "dmp/cli/app.hpp"
#include "dmp/cli/commands.hpp"
#include "dmp/cli/config.hpp"
#include "dmp/cli/pipeline.hpp"
