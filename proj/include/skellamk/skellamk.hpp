#pragma once

#include "skellamk/analytic.hpp"
#include "skellamk/errors.hpp"
#include "skellamk/governing.hpp"
#include "skellamk/montecarlo.hpp"
#include "skellamk/process.hpp"
#include "skellamk/rng.hpp"
#include "skellamk/serialize.hpp"
#include "skellamk/specfun.hpp"
#include "skellamk/subordinators.hpp"
#include "skellamk/trajectory.hpp"
