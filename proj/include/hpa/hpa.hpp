#pragma once

// Umbrella header for the HPA-axis delay/fractional dynamics library.

#include "hpa/errors.hpp"
#include "hpa/params.hpp"
#include "hpa/kernels.hpp"
#include "hpa/polynomial.hpp"
#include "hpa/hurwitz.hpp"
#include "hpa/model.hpp"
#include "hpa/chareq.hpp"
#include "hpa/fractional.hpp"
#include "hpa/solver.hpp"
