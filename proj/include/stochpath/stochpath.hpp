#pragma once

#include "stochpath/calibration.hpp"
#include "stochpath/engine.hpp"
#include "stochpath/errors.hpp"
#include "stochpath/io.hpp"
#include "stochpath/models.hpp"
#include "stochpath/random.hpp"
