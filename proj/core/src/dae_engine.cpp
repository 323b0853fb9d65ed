#include "psim/dae_engine.hpp"

#include <Eigen/LU>
#include <cmath>

namespace psim {

namespace {

/// Recursive emergency halving around the basic trapezoidal step.
bool advance(const DynamicModel& model, StatePartition& s, double dt,
             const IntegratorConfig& cfg, int depth) {
    StatePartition backup = s;
    if (step_full_model(model, s, dt, cfg)) return true;
    s = backup;
    if (depth >= cfg.max_halvings) return false;
    if (!advance(model, s, dt / 2.0, cfg, depth + 1)) return false;
    if (!advance(model, s, dt / 2.0, cfg, depth + 1)) {
        s = backup;
        return false;
    }
    return true;
}

}  // namespace

bool step_full_model(const DynamicModel& model, StatePartition& s, double dt,
                     const IntegratorConfig& cfg) {
    const Dims d = model.dims();
    const int n = d.n_zc + d.n_x + d.n_y;
    const Vec zc0 = s.z_c, x0 = s.x;
    Vec hc0, f0;
    model.eval_hc(s, hc0);
    model.eval_f(s, f0);

    Vec hc, f, g, R(n), Rt(n);
    JacobianBlocks J;
    Mat A(n, n);
    const double h2 = dt / 2.0;

    auto residual = [&](const StatePartition& sp, Vec& out) {
        model.eval_hc(sp, hc);
        model.eval_f(sp, f);
        model.eval_g(sp, g);
        out.segment(0, d.n_zc) = sp.z_c - zc0 - h2 * (hc0 + hc);
        out.segment(d.n_zc, d.n_x) = sp.x - x0 - h2 * (f0 + f);
        out.segment(d.n_zc + d.n_x, d.n_y) = g;
    };

    residual(s, R);
    for (int it = 0; it <= cfg.max_newton_iter; ++it) {
        if (!R.allFinite()) return false;
        if (R.lpNorm<Eigen::Infinity>() <= cfg.newton_tol) return true;
        if (it == cfg.max_newton_iter) return false;

        model.eval_jacobians(s, J);
        A.setZero();
        A.block(0, 0, d.n_zc, d.n_zc) = Mat::Identity(d.n_zc, d.n_zc) - h2 * J.dhc_dzc;
        A.block(0, d.n_zc, d.n_zc, d.n_x) = -h2 * J.dhc_dx;
        A.block(0, d.n_zc + d.n_x, d.n_zc, d.n_y) = -h2 * J.dhc_dy;
        A.block(d.n_zc, 0, d.n_x, d.n_zc) = -h2 * J.df_dzc;
        A.block(d.n_zc, d.n_zc, d.n_x, d.n_x) = Mat::Identity(d.n_x, d.n_x) - h2 * J.df_dx;
        A.block(d.n_zc, d.n_zc + d.n_x, d.n_x, d.n_y) = -h2 * J.df_dy;
        A.block(d.n_zc + d.n_x, 0, d.n_y, d.n_zc) = J.dg_dzc;
        A.block(d.n_zc + d.n_x, d.n_zc, d.n_y, d.n_x) = J.dg_dx;
        A.block(d.n_zc + d.n_x, d.n_zc + d.n_x, d.n_y, d.n_y) = J.dg_dy;

        const Vec du = A.partialPivLu().solve(-R);
        if (!du.allFinite()) return false;

        // Backtracking guard: device limiter kinks can make a raw Newton
        // update cycle across the clamp boundary.
        const double r0 = R.norm();
        const StatePartition base = s;
        double alpha = 1.0;
        for (int ls = 0; ls < 5; ++ls) {
            s.z_c = base.z_c + alpha * du.segment(0, d.n_zc);
            s.x = base.x + alpha * du.segment(d.n_zc, d.n_x);
            s.y = base.y + alpha * du.segment(d.n_zc + d.n_x, d.n_y);
            residual(s, Rt);
            if (Rt.allFinite() && (Rt.norm() < r0 || ls == 4)) break;
            alpha /= 2.0;
        }
        R = Rt;
    }
    return false;
}

bool solve_algebraic(const DynamicModel& model, StatePartition& s, double tol, int max_iter) {
    const Dims d = model.dims();
    Vec g;
    JacobianBlocks J;
    for (int it = 0; it <= max_iter; ++it) {
        model.eval_g(s, g);
        if (!g.allFinite()) return false;
        if (g.lpNorm<Eigen::Infinity>() <= tol) return true;
        if (it == max_iter) return false;
        model.eval_jacobians(s, J);
        const Vec dy = J.dg_dy.partialPivLu().solve(-g);
        if (!dy.allFinite()) return false;
        s.y += dy;
    }
    return false;
}

Trace simulate_full(DynamicModel& model, SimState& st, const EventSchedule& schedule,
                    double t_end, const IntegratorConfig& cfg, int* jump_counter) {
    model.status_restore(st.status);
    Trace trace;
    StatePartition s = st.part;
    double t = st.t;
    trace.add_sample(t, s);
    size_t ev = 0;
    while (ev < schedule.events.size() && schedule.events[ev].t < st.t - 1e-9) ++ev;
    int k = jump_counter ? *jump_counter : 0;

    while (t < t_end - 1e-9) {
        while (ev < schedule.events.size() && schedule.events[ev].t <= t + 1e-9) {
            model.apply_scheduled_event(schedule.events[ev]);
            trace.add_event(t, EventKind::fault, -1,
                            schedule.events[ev].type + " " + schedule.events[ev].branch);
            solve_algebraic(model, s);
            ++ev;
        }
        if (model.discrete_due(s, t)) {
            const DiscreteUpdate upd = model.apply_discrete(s, t);
            if (upd.changed) {
                ++k;
                trace.add_event(t, EventKind::jump, k, upd.detail);
                solve_algebraic(model, s);
            }
        }
        const double dt = std::min(cfg.dt, t_end - t);
        if (!advance(model, s, dt, cfg, 0)) {
            trace.termination = Termination::newton_failure;
            break;
        }
        t += dt;
        if (!model.within_bounds(s)) {
            trace.add_sample(t, s);
            trace.termination = Termination::short_term_unstable;
            break;
        }
        model.update_timers(s, t, dt);
        trace.add_sample(t, s);
    }

    st.t = t;
    st.part = s;
    st.status = model.status_snapshot();
    if (jump_counter) *jump_counter = k;
    return trace;
}

}  // namespace psim
