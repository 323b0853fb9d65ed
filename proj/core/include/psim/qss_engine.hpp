#pragma once

#include "psim/dae_engine.hpp"
#include "psim/model.hpp"

namespace psim {

struct QssConfig {
    double dt = 0.1;
    double newton_tol = 1e-9;
    int max_newton_iter = 30;
    int max_halvings = 3;  // emergency step splitting depth
    double singularity_threshold = 1e-10;  // on the row-scaled determinant
};

struct ManifoldResult {
    bool ok = false;
    double f_norm = 0.0;
    double g_norm = 0.0;
    int iterations = 0;
};

/// Newton on the stacked (f, g) over (x, y) with (z_c, z_d) frozen — the
/// implicit-function solve l(z_c, z_d). Iterates leaving the study-region
/// bounds abort the solve instead of silently landing on a foreign branch.
ManifoldResult solve_fast_equilibrium(const DynamicModel& model, StatePartition& s,
                                      double tol = 1e-10, int max_iter = 50);

/// One implicit trapezoidal step on z_c with (x, y) re-solved on the
/// constraint manifold (stacked Newton on trapezoidal-h_c + f + g).
bool step_qss(const DynamicModel& model, StatePartition& s, double dt, const QssConfig& cfg);

struct SingularityReport {
    double sign = 0.0;          // sign of the bordered determinant
    double log_abs_det = 0.0;   // -inf for an exactly singular matrix
    double scaled_magnitude = 0.0;  // |det| relative to row-norm scale
    bool flag = false;

    double det() const;  // sign * exp(log_abs_det); may overflow on large systems
};

/// Determinant test of the bordered Jacobian [[D_x f, D_y f], [D_x g, D_y g]].
SingularityReport detect_singularity(const DynamicModel& model, const StatePartition& s,
                                     double threshold = 1e-10);

/// QSS integration of the slow dynamics on the constraint manifold.
/// Shares the discrete-event semantics of simulate_full; events re-solve
/// (x, y) on the manifold. Manifold-solve failures terminate the run with
/// status `singularity` — recovery belongs to the hybrid engine.
Trace simulate_qss(DynamicModel& model, SimState& st, const EventSchedule& schedule,
                   double t_end, const QssConfig& cfg, int* jump_counter = nullptr);

}  // namespace psim
