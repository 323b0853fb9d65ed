#include <benchmark/benchmark.h>

#include "psim/dae_engine.hpp"
#include "psim/hybrid.hpp"
#include "psim/powerflow.hpp"
#include "psim/qss_engine.hpp"
#include "psim/scenario_io.hpp"

using namespace psim;

namespace {

std::string cases_dir() { return PSIM_CASES_DIR; }

struct Fixture {
    Case c;
    EventSchedule sched;
    Fixture()
        : c(load_case(cases_dir() + "/case14_stable.json")),
          sched(load_schedule(cases_dir() + "/sched_stable.json")) {}
};

const Fixture& fx() {
    static Fixture f;
    return f;
}

}  // namespace

static void BM_FullStep(benchmark::State& state) {
    PowerSystemModel m(fx().c);
    SimState st = initialize_equilibrium(m);
    IntegratorConfig cfg;
    StatePartition s = st.part;
    for (auto _ : state) {
        benchmark::DoNotOptimize(step_full_model(m, s, cfg.dt, cfg));
    }
}
BENCHMARK(BM_FullStep);

static void BM_QssStep(benchmark::State& state) {
    PowerSystemModel m(fx().c);
    SimState st = initialize_equilibrium(m);
    QssConfig cfg;
    StatePartition s = st.part;
    for (auto _ : state) {
        benchmark::DoNotOptimize(step_qss(m, s, cfg.dt, cfg));
    }
}
BENCHMARK(BM_QssStep);

static void BM_ManifoldSolve(benchmark::State& state) {
    PowerSystemModel m(fx().c);
    SimState st = initialize_equilibrium(m);
    for (auto _ : state) {
        StatePartition s = st.part;
        benchmark::DoNotOptimize(solve_fast_equilibrium(m, s));
    }
}
BENCHMARK(BM_ManifoldSolve);

static void BM_JacobianAssembly(benchmark::State& state) {
    PowerSystemModel m(fx().c);
    SimState st = initialize_equilibrium(m);
    JacobianBlocks J;
    for (auto _ : state) {
        m.eval_jacobians(st.part, J);
        benchmark::DoNotOptimize(J.dg_dy.data());
    }
}
BENCHMARK(BM_JacobianAssembly);

static void BM_FullHorizon10s(benchmark::State& state) {
    for (auto _ : state) {
        PowerSystemModel m(fx().c);
        SimState st = initialize_equilibrium(m);
        IntegratorConfig cfg;
        benchmark::DoNotOptimize(simulate_full(m, st, fx().sched, 10.0, cfg));
    }
}
BENCHMARK(BM_FullHorizon10s)->Unit(benchmark::kMillisecond);

static void BM_QssHorizon10s(benchmark::State& state) {
    for (auto _ : state) {
        PowerSystemModel m(fx().c);
        SimState st = initialize_equilibrium(m);
        QssConfig cfg;
        benchmark::DoNotOptimize(simulate_qss(m, st, fx().sched, 10.0, cfg));
    }
}
BENCHMARK(BM_QssHorizon10s)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
