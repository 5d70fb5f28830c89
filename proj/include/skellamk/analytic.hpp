#pragma once

// Closed-form distributional objects for every family.

#include "skellamk/levy.hpp"
#include "skellamk/moments.hpp"
#include "skellamk/pmf.hpp"
#include "skellamk/pmf_table.hpp"
#include "skellamk/transforms.hpp"
