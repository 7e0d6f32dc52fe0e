#pragma once

#include "ridgeopt/config.hpp"
#include "ridgeopt/csv.hpp"
#include "ridgeopt/errors.hpp"
#include "ridgeopt/estimation.hpp"
#include "ridgeopt/eval.hpp"
#include "ridgeopt/genmodel.hpp"
#include "ridgeopt/linalg.hpp"
#include "ridgeopt/optimize.hpp"
#include "ridgeopt/risk.hpp"
#include "ridgeopt/rng.hpp"
#include "ridgeopt/stats.hpp"
