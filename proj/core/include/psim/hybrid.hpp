#pragma once

#include <map>
#include <string>

#include "psim/dae_engine.hpp"
#include "psim/qss_engine.hpp"
#include "psim/stability.hpp"

namespace psim {

struct HybridParams {
    double tau1 = 20.0;      // full-model warm-up horizon after the disturbance
    double eta = 1e-3;       // limiter-state deviation tolerance at jumps
    int probe_steps = 200;   // full-model damping probe length (in full steps)
    IntegratorConfig full_cfg;
    QssConfig qss_cfg;
};

enum class StabilityVerdict { long_term_stable, oscillatory, unstable };

std::string to_string(StabilityVerdict v);

/// Rollback targets: the approximation start point plus a pre-jump
/// checkpoint per discrete jump, keyed by jump number.
struct CheckpointStore {
    SimState start;
    std::map<int, SimState> pre_jump;

    /// Rule: a failure attributed to jump k rolls back three jumps; the
    /// first two jumps (and any underflow) fall back to the start point.
    const SimState& select_rollback_point(int k) const;
};

/// Infinity-norm deviation between two states over the limiter slow states.
double oxl_deviation(const DynamicModel& model, const StatePartition& a,
                     const StatePartition& b);

struct HybridResult {
    Trace trace;
    StabilityVerdict verdict = StabilityVerdict::long_term_stable;
    bool switched_back = false;
    double switch_back_time = 0.0;  // time the continuation restarts from
    int trigger_jump_k = -1;        // jump number the switch-back is charged to
    std::string switch_reason;      // empty when no switch-back happened
    double max_deviation = 0.0;     // largest limiter deviation seen at jumps
    int jump_count = 0;

    double wall_full_s = 0.0;   // warm-up phase
    double wall_qss_s = 0.0;    // approximation phase, deviation checks included
    double wall_probe_s = 0.0;  // terminal damping probe
    double wall_cont_s = 0.0;   // full-model continuation after switch-back
};

/// The combined scheme: full model to tau1, then the quasi-steady-state
/// approximation with a per-jump deviation check against the full model,
/// and a terminal full-model damping probe of the limiter signals once
/// jumps cease. A failed check rolls the run back to a checkpoint and
/// finishes with the full model.
HybridResult run_hybrid(DynamicModel& model, const SimState& initial,
                        const EventSchedule& schedule, double t_end,
                        const HybridParams& params);

}  // namespace psim
