#pragma once

#include "psim/power_model.hpp"

namespace psim {

struct PowerFlowResult {
    Vec V;
    Vec theta;
    Vec p_gen;  // per generator, case order
    Vec q_gen;
    bool converged = false;
    int iterations = 0;
};

/// Newton-Raphson power flow on the case network: slack pinned, generator
/// buses PV at their dispatch, everything else PQ with constant loads.
PowerFlowResult solve_power_flow(const Case& c, double tol = 1e-10, int max_iter = 50);

/// Builds the pre-disturbance equilibrium: solves the power flow, back-solves
/// machine/AVR/governor/load states, and writes the matching setpoints
/// (V_ref, p_ref, load nominals) into the model so every device starts with
/// zero derivative.
SimState initialize_equilibrium(PowerSystemModel& model);

}  // namespace psim
