#pragma once

#include "tdm/bench.hpp"
#include "tdm/config.hpp"
#include "tdm/diffusivity.hpp"
#include "tdm/error.hpp"
#include "tdm/grid.hpp"
#include "tdm/metrics.hpp"
#include "tdm/pgm.hpp"
#include "tdm/phantom.hpp"
#include "tdm/report.hpp"
#include "tdm/smoothing.hpp"
#include "tdm/solver.hpp"
#include "tdm/speckle.hpp"
