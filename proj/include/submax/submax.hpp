#pragma once

// Umbrella header: sensitivity analysis for matched-pair observational
// studies under effect modification, with mean-difference, M-statistic and
// subgroup-aware group M-statistic scoring.

#include "submax/data_model.hpp"
#include "submax/errors.hpp"
#include "submax/io.hpp"
#include "submax/joint_test.hpp"
#include "submax/mvnorm.hpp"
#include "submax/normal.hpp"
#include "submax/rng.hpp"
#include "submax/scoring.hpp"
#include "submax/sensitivity.hpp"
#include "submax/serialize.hpp"
#include "submax/sim.hpp"
#include "submax/version.hpp"
