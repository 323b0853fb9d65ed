#include "doctest.h"
#include "helpers.hpp"
#include "psim/hybrid.hpp"
#include "psim/powerflow.hpp"

using namespace psim;
using testers::load_fixture;
using testers::load_sched;

TEST_CASE("rollback selection: first jumps fall back to the start point") {
    CheckpointStore store;
    store.start.t = 20.0;
    for (int k = 1; k <= 6; ++k) {
        SimState s;
        s.t = 20.0 + k;
        store.pre_jump[k] = s;
    }
    // a failure charged to jump k rolls back three jumps
    CHECK(store.select_rollback_point(1).t == 20.0);
    CHECK(store.select_rollback_point(2).t == 20.0);
    CHECK(store.select_rollback_point(3).t == 20.0);  // k - 3 = 0 underflows
    CHECK(store.select_rollback_point(4).t == 21.0);
    CHECK(store.select_rollback_point(5).t == 22.0);
    CHECK(store.select_rollback_point(6).t == 23.0);
}

TEST_CASE("rollback selection survives missing checkpoints") {
    CheckpointStore store;
    store.start.t = 20.0;
    CHECK(store.select_rollback_point(5).t == 20.0);  // nothing recorded yet
}

TEST_CASE("limiter deviation is an infinity norm over the limiter states only") {
    PowerSystemModel m(load_fixture("case14_case1"));
    SimState st = initialize_equilibrium(m);
    const auto oxl = m.oxl_zc_indices();
    REQUIRE(oxl.size() == 5);

    StatePartition a = st.part, b = st.part;
    CHECK(oxl_deviation(m, a, b) == 0.0);

    b.z_c(oxl[2]) += 1e-3;
    CHECK(oxl_deviation(m, a, b) == doctest::Approx(1e-3).epsilon(1e-12));
    b.z_c(oxl[0]) -= 2e-3;
    CHECK(oxl_deviation(m, a, b) == doctest::Approx(2e-3).epsilon(1e-12));

    // differences outside the limiter slots are invisible to the check
    b = st.part;
    const auto& gl = m.gens()[0];
    if (gl.gov_zc >= 0) b.z_c(gl.gov_zc) += 0.5;
    b.x(0) += 0.5;
    CHECK(oxl_deviation(m, a, b) == 0.0);
}

TEST_CASE("deviation over a model without limiters is zero") {
    testers::ToyLinModel m;
    const StatePartition a = m.state(0.1, 0.2, 0.3);
    const StatePartition b = m.state(-0.4, 0.5, -0.6);
    CHECK(oxl_deviation(m, a, b) == 0.0);
}

TEST_CASE("combined scheme on the benign scenario never leaves the approximation") {
    PowerSystemModel m(load_fixture("case14_stable"));
    SimState st = initialize_equilibrium(m);
    const EventSchedule sched = load_sched("sched_stable");
    HybridParams p;
    const HybridResult r = run_hybrid(m, st, sched, 300.0, p);

    CHECK(r.verdict == StabilityVerdict::long_term_stable);
    CHECK_FALSE(r.switched_back);
    CHECK(r.switch_reason.empty());
    CHECK(r.jump_count == 0);
    CHECK(r.max_deviation <= p.eta);
    CHECK(r.trace.termination == Termination::completed);
    CHECK(r.trace.back().t == doctest::Approx(300.0).epsilon(1e-9));

    // the handover to the approximation is recorded at tau1
    bool handover = false;
    for (const auto& ev : r.trace.events) {
        if (ev.kind == EventKind::mode_switch && std::abs(ev.t - p.tau1) < 1e-9)
            handover = true;
    }
    CHECK(handover);
}
