#pragma once

// Umbrella header: the whole laboratory for one-dimensional random walks
// in random environment — environments and their potential, valley
// analysis, exact birth-death formulas, quenched walk simulation and the
// Monte Carlo experiment harness.

#include "rwre/birth_death.hpp"
#include "rwre/common.hpp"
#include "rwre/distribution.hpp"
#include "rwre/environment.hpp"
#include "rwre/experiments.hpp"
#include "rwre/good_environment.hpp"
#include "rwre/parallel.hpp"
#include "rwre/potential.hpp"
#include "rwre/report.hpp"
#include "rwre/rng.hpp"
#include "rwre/rwre_version.hpp"
#include "rwre/valley.hpp"
#include "rwre/walk.hpp"
