#include "psim/qss_engine.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>

namespace psim {

namespace {

/// Recursive emergency halving around the basic manifold step; mirrors the
/// full-model integrator's policy. Needed when a limiter mode change makes
/// the single-step Newton target too far from the predictor.
bool advance_qss(const DynamicModel& model, StatePartition& s, double dt,
                 const QssConfig& cfg, int depth) {
    StatePartition backup = s;
    if (step_qss(model, s, dt, cfg)) return true;
    s = backup;
    if (depth >= cfg.max_halvings) return false;
    if (!advance_qss(model, s, dt / 2.0, cfg, depth + 1)) return false;
    if (!advance_qss(model, s, dt / 2.0, cfg, depth + 1)) {
        s = backup;
        return false;
    }
    return true;
}

}  // namespace

ManifoldResult solve_fast_equilibrium(const DynamicModel& model, StatePartition& s,
                                      double tol, int max_iter) {
    const Dims d = model.dims();
    const int n = d.n_x + d.n_y;
    ManifoldResult res;
    Vec f, g, R(n), Rt(n);
    JacobianBlocks J;
    Mat A(n, n);

    auto residual = [&](const StatePartition& sp, Vec& out) {
        model.eval_f(sp, f);
        model.eval_g(sp, g);
        out.segment(0, d.n_x) = f;
        out.segment(d.n_x, d.n_y) = g;
    };

    residual(s, R);
    for (int it = 0; it <= max_iter; ++it) {
        if (!R.allFinite() || !model.within_bounds(s)) return res;  // left the study region
        res.f_norm = d.n_x > 0 ? f.lpNorm<Eigen::Infinity>() : 0.0;
        res.g_norm = d.n_y > 0 ? g.lpNorm<Eigen::Infinity>() : 0.0;
        res.iterations = it;
        if (R.lpNorm<Eigen::Infinity>() <= tol) {
            res.ok = true;
            return res;
        }
        if (it == max_iter) return res;
        model.eval_jacobians(s, J);
        A.block(0, 0, d.n_x, d.n_x) = J.df_dx;
        A.block(0, d.n_x, d.n_x, d.n_y) = J.df_dy;
        A.block(d.n_x, 0, d.n_y, d.n_x) = J.dg_dx;
        A.block(d.n_x, d.n_x, d.n_y, d.n_y) = J.dg_dy;
        const Vec du = A.partialPivLu().solve(-R);
        if (!du.allFinite()) return res;

        const double r0 = R.norm();
        const StatePartition base = s;
        double alpha = 1.0;
        for (int ls = 0; ls < 5; ++ls) {
            s.x = base.x + alpha * du.segment(0, d.n_x);
            s.y = base.y + alpha * du.segment(d.n_x, d.n_y);
            residual(s, Rt);
            if (Rt.allFinite() && (Rt.norm() < r0 || ls == 4)) break;
            alpha /= 2.0;
        }
        R = Rt;
    }
    return res;
}

bool step_qss(const DynamicModel& model, StatePartition& s, double dt, const QssConfig& cfg) {
    const Dims d = model.dims();
    const int n = d.n_zc + d.n_x + d.n_y;
    const Vec zc0 = s.z_c;
    Vec hc0;
    model.eval_hc(s, hc0);

    Vec hc, f, g, R(n), Rt(n);
    JacobianBlocks J;
    Mat A(n, n);
    const double h2 = dt / 2.0;

    auto residual = [&](const StatePartition& sp, Vec& out) {
        model.eval_hc(sp, hc);
        model.eval_f(sp, f);
        model.eval_g(sp, g);
        out.segment(0, d.n_zc) = sp.z_c - zc0 - h2 * (hc0 + hc);
        out.segment(d.n_zc, d.n_x) = f;
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
        A.block(d.n_zc, 0, d.n_x, d.n_zc) = J.df_dzc;
        A.block(d.n_zc, d.n_zc, d.n_x, d.n_x) = J.df_dx;
        A.block(d.n_zc, d.n_zc + d.n_x, d.n_x, d.n_y) = J.df_dy;
        A.block(d.n_zc + d.n_x, 0, d.n_y, d.n_zc) = J.dg_dzc;
        A.block(d.n_zc + d.n_x, d.n_zc, d.n_y, d.n_x) = J.dg_dx;
        A.block(d.n_zc + d.n_x, d.n_zc + d.n_x, d.n_y, d.n_y) = J.dg_dy;

        const Vec du = A.partialPivLu().solve(-R);
        if (!du.allFinite()) return false;

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

double SingularityReport::det() const { return sign * std::exp(log_abs_det); }

SingularityReport detect_singularity(const DynamicModel& model, const StatePartition& s,
                                     double threshold) {
    const Dims d = model.dims();
    const int n = d.n_x + d.n_y;
    JacobianBlocks J;
    model.eval_jacobians(s, J);
    Mat B(n, n);
    B.block(0, 0, d.n_x, d.n_x) = J.df_dx;
    B.block(0, d.n_x, d.n_x, d.n_y) = J.df_dy;
    B.block(d.n_x, 0, d.n_y, d.n_x) = J.dg_dx;
    B.block(d.n_x, d.n_x, d.n_y, d.n_y) = J.dg_dy;

    SingularityReport rep;
    double log_scale = 0.0;
    for (int i = 0; i < n; ++i) {
        const double rn = B.row(i).cwiseAbs().maxCoeff();
        if (rn <= 0.0) {
            rep.sign = 0.0;
            rep.log_abs_det = -std::numeric_limits<double>::infinity();
            rep.scaled_magnitude = 0.0;
            rep.flag = true;
            return rep;
        }
        log_scale += std::log(rn);
    }

    const Eigen::PartialPivLU<Mat> lu(B);
    const Mat& U = lu.matrixLU();
    double sign = static_cast<double>(lu.permutationP().determinant());
    double log_abs = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = U(i, i);
        if (u == 0.0) {
            rep.sign = 0.0;
            rep.log_abs_det = -std::numeric_limits<double>::infinity();
            rep.scaled_magnitude = 0.0;
            rep.flag = true;
            return rep;
        }
        if (u < 0.0) sign = -sign;
        log_abs += std::log(std::abs(u));
    }
    rep.sign = sign;
    rep.log_abs_det = log_abs;
    rep.scaled_magnitude = std::exp(log_abs - log_scale);
    rep.flag = rep.scaled_magnitude < threshold;
    return rep;
}

Trace simulate_qss(DynamicModel& model, SimState& st, const EventSchedule& schedule,
                   double t_end, const QssConfig& cfg, int* jump_counter) {
    model.status_restore(st.status);
    Trace trace;
    StatePartition s = st.part;
    double t = st.t;
    // Project the handover state onto the constraint manifold so every
    // recorded sample satisfies the algebraic/fast residuals.
    if (!solve_fast_equilibrium(model, s, cfg.newton_tol, cfg.max_newton_iter).ok) {
        trace.add_sample(t, s);
        trace.termination = Termination::singularity;
        st.part = s;
        st.status = model.status_snapshot();
        return trace;
    }
    trace.add_sample(t, s);
    size_t ev = 0;
    while (ev < schedule.events.size() && schedule.events[ev].t < st.t - 1e-9) ++ev;
    int k = jump_counter ? *jump_counter : 0;

    auto resolve_manifold = [&]() {
        return solve_fast_equilibrium(model, s, cfg.newton_tol, cfg.max_newton_iter).ok;
    };

    bool failed = false;
    while (t < t_end - 1e-9 && !failed) {
        while (ev < schedule.events.size() && schedule.events[ev].t <= t + 1e-9) {
            model.apply_scheduled_event(schedule.events[ev]);
            trace.add_event(t, EventKind::fault, -1,
                            schedule.events[ev].type + " " + schedule.events[ev].branch);
            if (!resolve_manifold()) failed = true;
            ++ev;
        }
        if (failed) break;
        if (model.discrete_due(s, t)) {
            const DiscreteUpdate upd = model.apply_discrete(s, t);
            if (upd.changed) {
                ++k;
                trace.add_event(t, EventKind::jump, k, upd.detail);
                if (!resolve_manifold()) break;
            }
        }
        const double dt = std::min(cfg.dt, t_end - t);
        if (!advance_qss(model, s, dt, cfg, 0)) {
            failed = true;
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
    if (failed) trace.termination = Termination::singularity;

    st.t = t;
    st.part = s;
    st.status = model.status_snapshot();
    if (jump_counter) *jump_counter = k;
    return trace;
}

}  // namespace psim
