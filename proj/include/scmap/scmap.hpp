#pragma once

#include "scmap/baselines.hpp"
#include "scmap/cli.hpp"
#include "scmap/engine.hpp"
#include "scmap/error.hpp"
#include "scmap/master.hpp"
#include "scmap/mip.hpp"
#include "scmap/netmodel.hpp"
#include "scmap/pathcore.hpp"
#include "scmap/plan.hpp"
#include "scmap/pricer.hpp"
#include "scmap/simplex.hpp"
#include "scmap/sptg.hpp"
