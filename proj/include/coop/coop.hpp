#pragma once

#include "coop/errors.hpp"
#include "coop/model.hpp"
#include "coop/control.hpp"
#include "coop/equilibria.hpp"
#include "coop/simulation.hpp"
#include "coop/refgov.hpp"
#include "coop/analysis.hpp"
#include "coop/scenario.hpp"
#include "coop/csv.hpp"
#include "coop/acceptance.hpp"
