#pragma once

#include "sklarsomega/error.hpp"
#include "sklarsomega/data.hpp"
#include "sklarsomega/normal.hpp"
#include "sklarsomega/stats.hpp"
#include "sklarsomega/marginals.hpp"
#include "sklarsomega/correlation.hpp"
#include "sklarsomega/objectives.hpp"
#include "sklarsomega/optimizer.hpp"
#include "sklarsomega/estimation.hpp"
#include "sklarsomega/rng.hpp"
#include "sklarsomega/parallel.hpp"
#include "sklarsomega/simulate.hpp"
#include "sklarsomega/uncertainty.hpp"
#include "sklarsomega/diagnostics.hpp"
#include "sklarsomega/kripp_alpha.hpp"
#include "sklarsomega/study.hpp"
