#include "psim/hybrid.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace psim {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void append_trace(Trace& dst, Trace&& src, bool drop_first_sample) {
    const int base =
        static_cast<int>(dst.samples.size()) - (drop_first_sample && !src.samples.empty() ? 1 : 0);
    auto it = src.samples.begin();
    if (drop_first_sample && it != src.samples.end()) ++it;
    dst.samples.insert(dst.samples.end(), it, src.samples.end());
    for (TraceEvent& e : src.events) {
        e.sample_index += base;
        dst.events.push_back(std::move(e));
    }
    dst.termination = src.termination;
}

}  // namespace

std::string to_string(StabilityVerdict v) {
    switch (v) {
        case StabilityVerdict::long_term_stable: return "long-term-stable";
        case StabilityVerdict::oscillatory: return "oscillatory";
        case StabilityVerdict::unstable: return "unstable";
    }
    return "unknown";
}

const SimState& CheckpointStore::select_rollback_point(int k) const {
    if (k <= 2 || k - 3 <= 0) return start;
    const auto it = pre_jump.find(k - 3);
    return it == pre_jump.end() ? start : it->second;
}

double oxl_deviation(const DynamicModel& model, const StatePartition& a,
                     const StatePartition& b) {
    double dev = 0.0;
    for (int idx : model.oxl_zc_indices())
        dev = std::max(dev, std::abs(a.z_c(idx) - b.z_c(idx)));
    return dev;
}

HybridResult run_hybrid(DynamicModel& model, const SimState& initial,
                        const EventSchedule& schedule, double t_end,
                        const HybridParams& params) {
    HybridResult res;
    SimState st = initial;
    int k = 0;

    // Phase A: full model through the post-disturbance transient.
    const double warm_end = std::min(std::max(params.tau1, initial.t), t_end);
    {
        const auto t0 = std::chrono::steady_clock::now();
        Trace tr = simulate_full(model, st, schedule, warm_end, params.full_cfg, &k);
        res.wall_full_s = seconds_since(t0);
        append_trace(res.trace, std::move(tr), false);
    }
    if (res.trace.termination != Termination::completed) {
        res.verdict = StabilityVerdict::unstable;
        res.jump_count = k;
        return res;
    }

    CheckpointStore store;
    store.start = st;

    const double probe_window = params.probe_steps * params.full_cfg.dt;

    // Full-model continuation from a rollback point; truncates the trace
    // back to the checkpoint and re-runs events/jumps from there.
    auto switch_back = [&](const SimState& rb, int kk, const std::string& reason) {
        res.switched_back = true;
        res.trigger_jump_k = kk;
        res.switch_back_time = rb.t;
        res.switch_reason = reason;
        while (!res.trace.samples.empty() && res.trace.samples.back().t > rb.t + 1e-9)
            res.trace.samples.pop_back();
        std::erase_if(res.trace.events, [&](const TraceEvent& e) { return e.t > rb.t - 1e-9; });
        for (TraceEvent& e : res.trace.events)
            if (e.sample_index >= static_cast<int>(res.trace.samples.size()))
                e.sample_index = static_cast<int>(res.trace.samples.size()) - 1;
        res.trace.add_event(rb.t, EventKind::mode_switch, kk, reason);

        SimState cont = rb;
        int kc = (kk <= 2 || kk - 3 <= 0) ? 0 : kk - 3;
        const auto t0 = std::chrono::steady_clock::now();
        Trace tr = simulate_full(model, cont, schedule, t_end, params.full_cfg, &kc);
        res.wall_cont_s = seconds_since(t0);
        append_trace(res.trace, std::move(tr), true);
        st = cont;
        res.jump_count = kc;
    };

    // Verdict for a switched-back run: a diverging continuation is
    // unstable; otherwise the limiter signals over the final window decide
    // between sustained oscillation and settled operation.
    auto continuation_verdict = [&]() {
        if (res.trace.termination != Termination::completed)
            return StabilityVerdict::unstable;
        const auto oxl = model.oxl_zc_indices();
        const double w0 = std::max(res.switch_back_time, t_end - probe_window);
        DampingVerdict worst = DampingVerdict::damped;
        for (int idx : oxl) {
            std::vector<double> sig;
            for (const TraceSample& smp : res.trace.samples)
                if (smp.t >= w0 - 1e-9) sig.push_back(smp.state.z_c(idx));
            const DampingReport rep = assess_damping(sig);
            if (rep.verdict == DampingVerdict::undamped) return StabilityVerdict::oscillatory;
            if (rep.verdict == DampingVerdict::inconclusive) worst = DampingVerdict::inconclusive;
        }
        return worst == DampingVerdict::damped ? StabilityVerdict::long_term_stable
                                               : StabilityVerdict::oscillatory;
    };

    // Phase B: quasi-steady-state approximation with per-jump checks.
    StatePartition s = st.part;
    if (!solve_fast_equilibrium(model, s, params.qss_cfg.newton_tol,
                                params.qss_cfg.max_newton_iter).ok) {
        switch_back(store.start, k + 1, "start point off the constraint manifold");
        res.verdict = continuation_verdict();
        return res;
    }

    double t = st.t;
    res.trace.add_event(t, EventKind::mode_switch, -1, "qss approximation engaged");
    res.trace.add_sample(t, s);

    size_t ev = 0;
    while (ev < schedule.events.size() && schedule.events[ev].t < t - 1e-9) ++ev;

    bool rollback = false;
    int rb_k = 0;
    std::string rb_reason;
    const auto t_qss0 = std::chrono::steady_clock::now();

    while (t < t_end - 1e-9) {
        while (ev < schedule.events.size() && schedule.events[ev].t <= t + 1e-9) {
            model.apply_scheduled_event(schedule.events[ev]);
            res.trace.add_event(t, EventKind::fault, -1,
                                schedule.events[ev].type + " " + schedule.events[ev].branch);
            ++ev;
            if (!solve_fast_equilibrium(model, s, params.qss_cfg.newton_tol,
                                        params.qss_cfg.max_newton_iter).ok) {
                rollback = true;
                rb_k = k + 1;
                rb_reason = "manifold solve failed after scheduled event";
                break;
            }
        }
        if (rollback) break;

        if (model.discrete_due(s, t)) {
            SimState pre{t, s, model.status_snapshot()};
            const StatePartition s_pre = s;
            const DiscreteUpdate upd = model.apply_discrete(s, t);
            if (upd.changed) {
                ++k;
                store.pre_jump[k] = std::move(pre);
                res.trace.add_event(t, EventKind::jump, k, upd.detail);

                // Reference: the full model advanced one slow step from the
                // pre-jump point carrying the new discrete state.
                StatePartition sl = s_pre;
                sl.z_d = s.z_d;
                bool ok_l = solve_algebraic(model, sl);
                const int n_sub = std::max(
                    1, static_cast<int>(std::lround(params.qss_cfg.dt / params.full_cfg.dt)));
                for (int i = 0; i < n_sub && ok_l; ++i)
                    ok_l = step_full_model(model, sl, params.qss_cfg.dt / n_sub, params.full_cfg);

                if (!solve_fast_equilibrium(model, s, params.qss_cfg.newton_tol,
                                            params.qss_cfg.max_newton_iter).ok) {
                    rollback = true;
                    rb_k = k;
                    rb_reason = "manifold solve failed at jump";
                    break;
                }

                // Approximation: the same horizon along the manifold.
                StatePartition sq = s;
                const bool ok_q = step_qss(model, sq, params.qss_cfg.dt, params.qss_cfg);
                const double dev = (ok_l && ok_q)
                                       ? oxl_deviation(model, sl, sq)
                                       : std::numeric_limits<double>::infinity();
                res.max_deviation = std::max(res.max_deviation, dev);
                if (dev > params.eta) {
                    rollback = true;
                    rb_k = k;
                    rb_reason = "limiter deviation above tolerance at jump";
                    break;
                }
            }
        }

        const double dt = std::min(params.qss_cfg.dt, t_end - t);
        if (!step_qss(model, s, dt, params.qss_cfg)) {
            rollback = true;
            rb_k = k + 1;
            rb_reason = "qss step failed";
            break;
        }
        t += dt;
        if (!model.within_bounds(s)) {
            rollback = true;
            rb_k = k + 1;
            rb_reason = "qss trajectory left the study region";
            break;
        }
        model.update_timers(s, t, dt);
        res.trace.add_sample(t, s);
    }
    res.wall_qss_s = seconds_since(t_qss0);
    res.jump_count = k;

    if (rollback) {
        switch_back(store.select_rollback_point(rb_k), rb_k, rb_reason);
        res.verdict = continuation_verdict();
        return res;
    }

    st.t = t;
    st.part = s;
    st.status = model.status_snapshot();

    // Phase C: jumps have ceased; probe the limiter signals with the full
    // model to rule out a sustained oscillation the manifold cannot see.
    if (model.any_oxl_engaged(s) && !model.oxl_zc_indices().empty()) {
        const auto oxl = model.oxl_zc_indices();
        auto run_probe = [&](int steps) {
            SimState ps = st;
            EventSchedule none;
            Trace pt = simulate_full(model, ps, none, st.t + steps * params.full_cfg.dt,
                                     params.full_cfg);
            model.status_restore(st.status);
            if (pt.termination != Termination::completed) return DampingVerdict::undamped;
            DampingVerdict worst = DampingVerdict::damped;
            for (int idx : oxl) {
                std::vector<double> sig;
                sig.reserve(pt.samples.size());
                for (const TraceSample& smp : pt.samples) sig.push_back(smp.state.z_c(idx));
                const DampingReport rep = assess_damping(sig);
                if (rep.verdict == DampingVerdict::undamped) return DampingVerdict::undamped;
                if (rep.verdict == DampingVerdict::inconclusive)
                    worst = DampingVerdict::inconclusive;
            }
            return worst;
        };

        const auto t0 = std::chrono::steady_clock::now();
        DampingVerdict dv = run_probe(params.probe_steps);
        if (dv == DampingVerdict::inconclusive) dv = run_probe(2 * params.probe_steps);
        res.wall_probe_s = seconds_since(t0);

        if (dv != DampingVerdict::damped) {
            switch_back(store.select_rollback_point(k + 1), k + 1,
                        dv == DampingVerdict::undamped
                            ? "undamped limiter oscillation in terminal probe"
                            : "inconclusive damping probe");
            res.verdict = res.trace.termination != Termination::completed
                              ? StabilityVerdict::unstable
                              : StabilityVerdict::oscillatory;
            return res;
        }
    }

    res.verdict = StabilityVerdict::long_term_stable;
    return res;
}

}  // namespace psim
