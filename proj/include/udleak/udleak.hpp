#pragma once

#include "udleak/errors.hpp"
#include "udleak/model.hpp"
#include "udleak/linalg.hpp"
#include "udleak/quadrature.hpp"
#include "udleak/bessel.hpp"
#include "udleak/wightman.hpp"
#include "udleak/integrals.hpp"
#include "udleak/density.hpp"
#include "udleak/entanglement.hpp"
