#pragma once

#include "postsel/calibration.hpp"
#include "postsel/errors.hpp"
#include "postsel/evalues.hpp"
#include "postsel/experiments.hpp"
#include "postsel/metrics.hpp"
#include "postsel/procedures.hpp"
#include "postsel/regions.hpp"
#include "postsel/rng.hpp"
#include "postsel/serialize.hpp"
#include "postsel/version.hpp"
