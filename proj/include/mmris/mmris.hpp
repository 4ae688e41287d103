#pragma once

#include "mmris/common.hpp"
#include "mmris/scenario.hpp"
#include "mmris/scenario_io.hpp"
#include "mmris/channel.hpp"
#include "mmris/path_select.hpp"
#include "mmris/grouping.hpp"
#include "mmris/beamforming.hpp"
#include "mmris/schedule_lp.hpp"
#include "mmris/optimizer.hpp"
#include "mmris/plan.hpp"
#include "mmris/baselines.hpp"
#include "mmris/pipeline.hpp"
