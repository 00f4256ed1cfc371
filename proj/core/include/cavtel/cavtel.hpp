#pragma once

#include "cavtel/analytic.hpp"
#include "cavtel/calibrate.hpp"
#include "cavtel/errors.hpp"
#include "cavtel/experiment.hpp"
#include "cavtel/hilbert.hpp"
#include "cavtel/model.hpp"
#include "cavtel/protocol.hpp"
#include "cavtel/rng.hpp"
#include "cavtel/trajectory.hpp"
#include "cavtel/types.hpp"
