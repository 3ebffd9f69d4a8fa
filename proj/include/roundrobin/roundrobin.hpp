#pragma once

// Umbrella header: the full library minus the CLI front end
// (include roundrobin/cli.hpp separately; it pulls in CLI11 and json).

#include "roundrobin/accumulators.hpp"
#include "roundrobin/asymptotics.hpp"
#include "roundrobin/enumeration.hpp"
#include "roundrobin/errors.hpp"
#include "roundrobin/lattice.hpp"
#include "roundrobin/model.hpp"
#include "roundrobin/monte_carlo.hpp"
#include "roundrobin/rng.hpp"
#include "roundrobin/tables.hpp"
#include "roundrobin/total_variation.hpp"
