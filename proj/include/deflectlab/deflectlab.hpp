#pragma once

#include "deflectlab/constants.hpp"
#include "deflectlab/detector.hpp"
#include "deflectlab/disturbance.hpp"
#include "deflectlab/fft.hpp"
#include "deflectlab/inference.hpp"
#include "deflectlab/math_util.hpp"
#include "deflectlab/optics.hpp"
#include "deflectlab/parallel.hpp"
#include "deflectlab/quadrature.hpp"
#include "deflectlab/rng.hpp"
#include "deflectlab/runner.hpp"
#include "deflectlab/sampling.hpp"
#include "deflectlab/scenario.hpp"
#include "deflectlab/spectrum.hpp"
#include "deflectlab/timeseries.hpp"
#include "deflectlab/units.hpp"
