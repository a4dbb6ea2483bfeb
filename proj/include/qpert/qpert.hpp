#pragma once

// Umbrella header for the qpert library: order-n corrections to a
// time-evolving quantum state read off from blocks of the exponential of a
// block upper-bidiagonal matrix, cross-checked against stationary
// perturbation theory, time-ordered quadrature and exact propagation.

#include "qpert/block_method.hpp"
#include "qpert/config.hpp"
#include "qpert/dyson.hpp"
#include "qpert/expm.hpp"
#include "qpert/fock.hpp"
#include "qpert/linalg.hpp"
#include "qpert/matrix_io.hpp"
#include "qpert/oscillator.hpp"
#include "qpert/rspt.hpp"
#include "qpert/runner.hpp"
#include "qpert/types.hpp"
