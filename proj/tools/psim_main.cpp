// Long-term stability simulator front end: full, quasi-steady-state and
// combined integration modes over a JSON-described network and event
// schedule, with CSV trace and JSON verdict outputs.

#include <chrono>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "psim/dae_engine.hpp"
#include "psim/hybrid.hpp"
#include "psim/powerflow.hpp"
#include "psim/qss_engine.hpp"
#include "psim/scenario_io.hpp"
#include "psim/stability.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Verdict for the single-model modes: early termination is instability;
// otherwise the limiter signals over the closing window decide.
psim::StabilityVerdict single_model_verdict(const psim::Trace& trace,
                                            const psim::DynamicModel& model,
                                            double window) {
    using namespace psim;
    if (trace.termination != Termination::completed) return StabilityVerdict::unstable;
    if (trace.samples.empty()) return StabilityVerdict::long_term_stable;
    const double w0 = trace.samples.back().t - window;
    DampingVerdict worst = DampingVerdict::damped;
    for (int idx : model.oxl_zc_indices()) {
        std::vector<double> sig;
        for (const TraceSample& s : trace.samples)
            if (s.t >= w0) sig.push_back(s.state.z_c(idx));
        const DampingReport rep = assess_damping(sig);
        if (rep.verdict == DampingVerdict::undamped) return StabilityVerdict::oscillatory;
        if (rep.verdict == DampingVerdict::inconclusive) worst = DampingVerdict::inconclusive;
    }
    return worst == DampingVerdict::damped ? StabilityVerdict::long_term_stable
                                           : StabilityVerdict::oscillatory;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-fidelity long-term power system stability simulator"};

    std::string case_path, schedule_path, mode = "hybrid", out_path, verdict_path;
    double t_end = 300.0, dt = 0.01, dt_qss = 0.1, eta = 1e-3, tau1 = 20.0;
    int probe_steps = 200;
    long seed = 0;

    app.add_option("--case", case_path, "case JSON file")->required();
    app.add_option("--schedule", schedule_path, "event schedule JSON file");
    app.add_option("--mode", mode, "full | qss | hybrid")
        ->check(CLI::IsMember({"full", "qss", "hybrid"}));
    app.add_option("--t-end", t_end, "simulation horizon, s");
    app.add_option("--dt", dt, "full model step, s");
    app.add_option("--dt-qss", dt_qss, "quasi-steady-state step, s");
    app.add_option("--eta", eta, "limiter deviation tolerance");
    app.add_option("--tau1", tau1, "full-model warm-up horizon, s");
    app.add_option("--probe-steps", probe_steps, "terminal damping probe length, steps");
    app.add_option("--out", out_path, "trace CSV output path");
    app.add_option("--verdict", verdict_path, "verdict JSON output path");
    app.add_option("--seed", seed, "reserved for randomized studies");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    using namespace psim;
    try {
        const Case c = load_case(case_path);
        const EventSchedule schedule =
            schedule_path.empty() ? EventSchedule{} : load_schedule(schedule_path);

        PowerSystemModel model(c);
        SimState st = initialize_equilibrium(model);

        HybridParams params;
        params.tau1 = tau1;
        params.eta = eta;
        params.probe_steps = probe_steps;
        params.full_cfg.dt = dt;
        params.qss_cfg.dt = dt_qss;

        HybridResult result;
        if (mode == "full") {
            const auto t0 = std::chrono::steady_clock::now();
            result.trace = simulate_full(model, st, schedule, t_end, params.full_cfg,
                                         &result.jump_count);
            result.wall_full_s = seconds_since(t0);
            result.verdict =
                single_model_verdict(result.trace, model, probe_steps * dt);
        } else if (mode == "qss") {
            // The approximation needs the post-disturbance transient settled
            // first, so it shares the full-model warm-up with the combined
            // scheme.
            const double warm_end = std::min(tau1, t_end);
            auto t0 = std::chrono::steady_clock::now();
            result.trace =
                simulate_full(model, st, schedule, warm_end, params.full_cfg,
                              &result.jump_count);
            result.wall_full_s = seconds_since(t0);
            if (result.trace.termination == Termination::completed && warm_end < t_end) {
                if (!solve_fast_equilibrium(model, st.part).ok) {
                    result.trace.termination = Termination::singularity;
                } else {
                    t0 = std::chrono::steady_clock::now();
                    Trace qt = simulate_qss(model, st, schedule, t_end, params.qss_cfg,
                                            &result.jump_count);
                    result.wall_qss_s = seconds_since(t0);
                    const int base = static_cast<int>(result.trace.samples.size()) - 1;
                    for (size_t i = 1; i < qt.samples.size(); ++i)
                        result.trace.samples.push_back(qt.samples[i]);
                    for (TraceEvent& e : qt.events) {
                        e.sample_index += base;
                        result.trace.events.push_back(std::move(e));
                    }
                    result.trace.termination = qt.termination;
                }
            }
            result.verdict = result.trace.termination == Termination::completed
                                 ? StabilityVerdict::long_term_stable
                                 : StabilityVerdict::unstable;
        } else {
            result = run_hybrid(model, st, schedule, t_end, params);
        }

        if (!out_path.empty()) write_trace_csv(out_path, result.trace, model);
        if (!verdict_path.empty()) write_verdict(verdict_path, result, mode);

        std::printf("mode=%s verdict=%s termination=%s t_final=%.6g samples=%zu jumps=%d\n",
                    mode.c_str(), to_string(result.verdict).c_str(),
                    to_string(result.trace.termination).c_str(),
                    result.trace.samples.empty() ? 0.0 : result.trace.samples.back().t,
                    result.trace.samples.size(), result.jump_count);
        return 0;
    } catch (const ScenarioError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
