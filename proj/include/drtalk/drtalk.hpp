#pragma once

// Cheap-talk partition equilibria for multi-consumer demand response:
// decoupled effective subgames, best-response-dynamics equilibrium
// computation, bias-minimizing tariffs, and welfare benchmarks.

#include "drtalk/canonical.hpp"
#include "drtalk/csv.hpp"
#include "drtalk/decoupling.hpp"
#include "drtalk/equilibrium.hpp"
#include "drtalk/experiments.hpp"
#include "drtalk/parallel.hpp"
#include "drtalk/population.hpp"
#include "drtalk/pricing.hpp"
#include "drtalk/prior.hpp"
#include "drtalk/scenario_io.hpp"
#include "drtalk/welfare.hpp"
