#pragma once

#include "ctmdp/model.hpp"

namespace ctmdp {

/**
 * Admission-control birth-death chain on states 1..n (queue length + 1).
 * Actions are service rates {0.5, 1, 2}; arrivals at rate 1 below n, services
 * at rate u above 1. f = 0.1 (i - 1) + 0.05 u, g(i) = 0.2 (i - 1), T = 1,
 * phi(i) = i, lambda0 = kappa0 = 1, B0 = {1}. C0, C1, C2 are declared as the
 * exact maxima over the data.
 */
ModelSpec demo_model(int n_states = 10);

/// Uncontrolled two-state chain: q12 = q21 = 1, f = 0, g = (0, 1), T = 1.
ModelSpec two_state_model();

}  // namespace ctmdp
