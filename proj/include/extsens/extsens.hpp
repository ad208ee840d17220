#pragma once

// Umbrella header.

#include "extsens/analysis.hpp"
#include "extsens/calibration.hpp"
#include "extsens/error.hpp"
#include "extsens/exact_binary.hpp"
#include "extsens/io.hpp"
#include "extsens/math.hpp"
#include "extsens/oracle.hpp"
#include "extsens/paired_data.hpp"
#include "extsens/parallel.hpp"
#include "extsens/qp.hpp"
#include "extsens/rng.hpp"
#include "extsens/simulation.hpp"
#include "extsens/uncertainty.hpp"
