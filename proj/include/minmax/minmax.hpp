#pragma once

#include "minmax/polynomial.hpp"
#include "minmax/function.hpp"
#include "minmax/dynamics.hpp"
#include "minmax/spectral.hpp"
#include "minmax/classify.hpp"
#include "minmax/experiments.hpp"
#include "minmax/properties.hpp"
