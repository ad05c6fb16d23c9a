#ifndef PSEARCH_PSEARCH_HPP
#define PSEARCH_PSEARCH_HPP

#include "psearch/core/factors.hpp"
#include "psearch/core/model.hpp"
#include "psearch/core/price_law.hpp"
#include "psearch/solver/equilibrium.hpp"
#include "psearch/solver/disclosure.hpp"
#include "psearch/welfare/welfare.hpp"
#include "psearch/sim/ks.hpp"
#include "psearch/sim/simulator.hpp"
#include "psearch/cli/config.hpp"
#include "psearch/cli/commands.hpp"

#endif  // PSEARCH_PSEARCH_HPP
