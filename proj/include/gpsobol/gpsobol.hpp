#pragma once

// Umbrella header for the gpsobol library: Gaussian-process metamodels with
// closed-form and simulated first-order sensitivity indices.

#include "gpsobol/bench.hpp"
#include "gpsobol/common.hpp"
#include "gpsobol/design.hpp"
#include "gpsobol/distributions.hpp"
#include "gpsobol/fit.hpp"
#include "gpsobol/gp.hpp"
#include "gpsobol/kernel.hpp"
#include "gpsobol/kernel_integrals.hpp"
#include "gpsobol/main_effect.hpp"
#include "gpsobol/model_io.hpp"
#include "gpsobol/quadrature.hpp"
#include "gpsobol/sobol.hpp"
#include "gpsobol/trend.hpp"
