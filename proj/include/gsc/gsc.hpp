#pragma once

// Umbrella header for the numeric core (no JSON dependency).

#include "gsc/errors.hpp"
#include "gsc/random.hpp"
#include "gsc/tracks.hpp"
#include "gsc/summary.hpp"
#include "gsc/stats.hpp"
#include "gsc/segmentation.hpp"
#include "gsc/subsampling.hpp"
#include "gsc/testing.hpp"
#include "gsc/simulate.hpp"
