#pragma once

// Stationary determinantal processes on Z^d defined by symbols f: T^d -> [0,1]:
// cylinder probabilities, exact sampling, domination constants, certified
// entropy bounds, phase classification, and a spanning-tree Monte Carlo oracle.

#include "detproc/common.hpp"
#include "detproc/entropy.hpp"
#include "detproc/json_io.hpp"
#include "detproc/kernel.hpp"
#include "detproc/order_phase.hpp"
#include "detproc/quadrature.hpp"
#include "detproc/rng.hpp"
#include "detproc/sampling.hpp"
#include "detproc/spectral.hpp"
#include "detproc/symbol.hpp"
#include "detproc/ust.hpp"
