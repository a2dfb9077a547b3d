#pragma once

#include "incdist/common.hpp"
#include "incdist/special_functions.hpp"
#include "incdist/quadrature.hpp"
#include "incdist/roots.hpp"
#include "incdist/random.hpp"
#include "incdist/nelder_mead.hpp"
#include "incdist/distributions.hpp"
#include "incdist/weighted_data.hpp"
#include "incdist/estimation.hpp"
#include "incdist/dimension_reduction.hpp"
#include "incdist/analysis.hpp"
#include "incdist/serialization.hpp"
