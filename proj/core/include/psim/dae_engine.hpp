#pragma once

#include "psim/case.hpp"
#include "psim/model.hpp"

namespace psim {

struct IntegratorConfig {
    double dt = 0.01;
    double newton_tol = 1e-9;
    int max_newton_iter = 20;
    int max_halvings = 2;  // emergency step splitting depth
};

/// One implicit trapezoidal step on (z_c, x) with y solved simultaneously.
/// Returns false when Newton fails to converge.
bool step_full_model(const DynamicModel& model, StatePartition& s, double dt,
                     const IntegratorConfig& cfg);

/// Newton solve of g = 0 over y with everything else frozen.
bool solve_algebraic(const DynamicModel& model, StatePartition& s, double tol = 1e-10,
                     int max_iter = 30);

/// Full long-term stability model integration from st.t to t_end.
/// Applies scheduled events at their instants, handles discrete jumps
/// (z_d updates first, then the continuous flow resumes), and terminates
/// on divergence-bound exit or persistent Newton failure. st is advanced
/// to the final state; jump_counter, when given, continues an episode's
/// jump numbering. Samples every `sample_stride` accepted steps.
Trace simulate_full(DynamicModel& model, SimState& st, const EventSchedule& schedule,
                    double t_end, const IntegratorConfig& cfg, int* jump_counter = nullptr);

}  // namespace psim
