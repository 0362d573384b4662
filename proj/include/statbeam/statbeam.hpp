#pragma once

#include "statbeam/channel.hpp"
#include "statbeam/design.hpp"
#include "statbeam/error.hpp"
#include "statbeam/fixtures.hpp"
#include "statbeam/io.hpp"
#include "statbeam/montecarlo.hpp"
#include "statbeam/numerics.hpp"
#include "statbeam/parallel.hpp"
#include "statbeam/random.hpp"
#include "statbeam/rates.hpp"
#include "statbeam/sweep.hpp"
#include "statbeam/validation.hpp"
