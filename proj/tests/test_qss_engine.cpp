#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "psim/dae_engine.hpp"
#include "psim/qss_engine.hpp"

using namespace psim;
using testers::FoldModel;
using testers::ToyLinModel;
using testers::load_fixture;
using testers::load_sched;

namespace {

/// Fold model with a constant drift pushing the slow state toward the
/// singular point z = 0 of the manifold x^2 = z.
class FoldDriftModel : public FoldModel {
  public:
    void eval_hc(const StatePartition&, Vec& out) const override {
        out.resize(1);
        out(0) = -0.5;
    }
};

}  // namespace

TEST_CASE("manifold solve lands on the implicit-function branch") {
    ToyLinModel m;  // f = z - x, g = y - x
    m.a_z = 1.0;
    m.a_x = -1.0;
    m.a_y = 0.0;
    m.b_z = 0.0;
    m.b_x = -1.0;
    m.b_y = 1.0;
    StatePartition s = m.state(0.7, 0.0, 0.0);
    const ManifoldResult r = solve_fast_equilibrium(m, s);
    REQUIRE(r.ok);
    CHECK(s.x(0) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(s.y(0) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(r.f_norm < 1e-10);
    CHECK(r.g_norm < 1e-10);
}

TEST_CASE("two-branch manifold: close guesses converge, far guesses abort") {
    FoldModel m;  // f = z - x^2, solutions x = +-1 at z = 1
    StatePartition s = m.state(1.0, 1.2, 1.2);
    REQUIRE(solve_fast_equilibrium(m, s).ok);
    CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-10));

    s = m.state(1.0, -1.3, -1.3);
    REQUIRE(solve_fast_equilibrium(m, s).ok);
    CHECK(s.x(0) == doctest::Approx(-1.0).epsilon(1e-10));

    // near the fold the Newton update explodes out of the study region;
    // the solver must abort instead of silently picking a branch
    s = m.state(1.0, 0.01, 0.01);
    CHECK_FALSE(solve_fast_equilibrium(m, s).ok);
}

TEST_CASE("quasi-steady step advances the slow state on the manifold") {
    ToyLinModel m;
    m.c_z = -1.0;  // z' = -z
    m.a_z = 1.0;
    m.a_x = -1.0;
    m.a_y = 0.0;
    m.b_z = 0.0;
    m.b_x = -1.0;
    m.b_y = 1.0;
    StatePartition s = m.state(1.0, 1.0, 1.0);
    QssConfig cfg;
    const double dt = 0.1;
    REQUIRE(step_qss(m, s, dt, cfg));
    const double z1 = (1.0 - dt / 2) / (1.0 + dt / 2);
    CHECK(s.z_c(0) == doctest::Approx(z1).epsilon(1e-12));
    CHECK(s.x(0) == doctest::Approx(z1).epsilon(1e-12));
    CHECK(s.y(0) == doctest::Approx(z1).epsilon(1e-12));
}

TEST_CASE("quasi-steady step with a quiescent slow state is the identity") {
    ToyLinModel m;
    m.c_z = 0.0;
    StatePartition s = m.state(0.7, 0.7, 0.7);
    QssConfig cfg;
    REQUIRE(step_qss(m, s, 0.1, cfg));
    CHECK(s.z_c(0) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(s.x(0) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("bordered determinant reproduces the 2x2 example") {
    ToyLinModel m;  // f = -x + y, g = y - x/2
    m.a_z = 0.0;
    m.a_x = -1.0;
    m.a_y = 1.0;
    m.b_z = 0.0;
    m.b_x = -0.5;
    m.b_y = 1.0;
    const StatePartition s = m.state(0.0, 0.0, 0.0);
    const SingularityReport rep = detect_singularity(m, s);
    CHECK(rep.det() == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK_FALSE(rep.flag);
}

TEST_CASE("singular bordered jacobian is flagged") {
    FoldModel m;
    const StatePartition s = m.state(0.0, 0.0, 0.0);  // fold point: df/dx = 0
    const SingularityReport rep = detect_singularity(m, s);
    CHECK(rep.flag);
    CHECK(rep.scaled_magnitude < 1e-10);
}

TEST_CASE("slow drift into the fold terminates the run as singular") {
    FoldDriftModel m;
    SimState st;
    st.t = 0.0;
    st.part = m.state(1.0, 1.0, 1.0);
    EventSchedule none;
    QssConfig cfg;
    const Trace tr = simulate_qss(m, st, none, 10.0, cfg);
    CHECK(tr.termination == Termination::singularity);
    CHECK(st.t < 2.5);  // z reaches the fold near t = 2
}

TEST_CASE("quasi-steady trajectory stays on the manifold and tracks the full model") {
    const Case c = load_fixture("case14_stable");
    const EventSchedule sched = load_sched("sched_stable");
    IntegratorConfig fc;
    QssConfig qc;

    PowerSystemModel mf(c);
    SimState sf = initialize_equilibrium(mf);
    const Trace warm_f = simulate_full(mf, sf, sched, 20.0, fc);
    REQUIRE(warm_f.termination == Termination::completed);

    PowerSystemModel mq(c);
    SimState sq = initialize_equilibrium(mq);
    simulate_full(mq, sq, sched, 20.0, fc);

    EventSchedule rest;
    const Trace tr_f = simulate_full(mf, sf, rest, 120.0, fc);
    const Trace tr_q = simulate_qss(mq, sq, rest, 120.0, qc);
    REQUIRE(tr_f.termination == Termination::completed);
    REQUIRE(tr_q.termination == Termination::completed);

    Vec f, g;
    double worst_res = 0.0;
    for (const auto& smp : tr_q.samples) {
        mq.eval_f(smp.state, f);
        mq.eval_g(smp.state, g);
        worst_res = std::max({worst_res, testers::inf_norm(f), testers::inf_norm(g)});
    }
    CHECK(worst_res < 1e-8);

    // slow-state agreement between the two models on the shared time grid
    double worst_dev = 0.0;
    size_t j = 0;
    for (const auto& sq_smp : tr_q.samples) {
        while (j + 1 < tr_f.samples.size() && tr_f.samples[j].t < sq_smp.t - 1e-6) ++j;
        if (std::abs(tr_f.samples[j].t - sq_smp.t) > 1e-6) continue;
        worst_dev = std::max(
            worst_dev,
            (tr_f.samples[j].state.z_c - sq_smp.state.z_c).lpNorm<Eigen::Infinity>());
    }
    CHECK(worst_dev < 1e-2);
}
