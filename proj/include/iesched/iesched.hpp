// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "iesched/branch_bound.hpp"
#include "iesched/building.hpp"
#include "iesched/devices.hpp"
#include "iesched/harness.hpp"
#include "iesched/json_io.hpp"
#include "iesched/lp_format.hpp"
#include "iesched/milp.hpp"
#include "iesched/probseq.hpp"
#include "iesched/rng.hpp"
#include "iesched/scenario.hpp"
#include "iesched/scheduler.hpp"
#include "iesched/simplex.hpp"
#include "iesched/special.hpp"
