#pragma once

#include "sdexp/analysis.hpp"
#include "sdexp/config.hpp"
#include "sdexp/errors.hpp"
#include "sdexp/expression.hpp"
#include "sdexp/io.hpp"
#include "sdexp/model.hpp"
#include "sdexp/montecarlo.hpp"
#include "sdexp/noise.hpp"
#include "sdexp/schemes.hpp"
