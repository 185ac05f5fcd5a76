#pragma once

// Umbrella header.

#include "evit/decision.hpp"
#include "evit/domain.hpp"
#include "evit/enumeration.hpp"
#include "evit/error.hpp"
#include "evit/evaluation.hpp"
#include "evit/gp_regressor.hpp"
#include "evit/io.hpp"
#include "evit/parallel.hpp"
#include "evit/pipeline.hpp"
#include "evit/population_sim.hpp"
#include "evit/quality_model.hpp"
#include "evit/random.hpp"
#include "evit/similarity.hpp"
#include "evit/transfer.hpp"
