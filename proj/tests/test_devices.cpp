#include <cmath>

#include "doctest.h"
#include "psim/devices.hpp"

using namespace psim;
using namespace psim::dev;

TEST_CASE("clamp is idempotent and order-preserving") {
    CHECK(clamp(0.5, 0.0, 1.0) == 0.5);
    CHECK(clamp(-2.0, 0.0, 1.0) == 0.0);
    CHECK(clamp(7.0, 0.0, 1.0) == 1.0);
    for (double v : {-3.0, -0.1, 0.0, 0.4, 1.0, 9.0}) {
        const double once = clamp(v, 0.0, 1.0);
        CHECK(clamp(once, 0.0, 1.0) == once);
    }
}

TEST_CASE("stator relations reproduce the dq closed form") {
    GeneratorParams gp;
    gp.xd = 1.8;
    gp.xq = 1.7;
    gp.xdp = 0.3;
    gp.xqp = 0.55;
    const double delta = 0.5, eqp = 1.1, edp = -0.2, V = 1.02, th = 0.1;
    const StatorOut o = stator(gp, delta, eqp, edp, V, th);

    const double vd = V * std::sin(delta - th);
    const double vq = V * std::cos(delta - th);
    CHECK(o.vd == doctest::Approx(vd).epsilon(1e-15));
    CHECK(o.vq == doctest::Approx(vq).epsilon(1e-15));
    CHECK(o.id == doctest::Approx((eqp - vq) / 0.3).epsilon(1e-15));
    CHECK(o.iq == doctest::Approx((vd - edp) / 0.55).epsilon(1e-15));
    CHECK(o.pe == doctest::Approx(o.vd * o.id + o.vq * o.iq).epsilon(1e-15));
    CHECK(o.qe == doctest::Approx(o.vq * o.id - o.vd * o.iq).epsilon(1e-15));
    CHECK(o.i_f == doctest::Approx(eqp + (1.8 - 0.3) * o.id).epsilon(1e-15));
}

TEST_CASE("stator sensitivities match central differences") {
    GeneratorParams gp;
    const double delta = 0.7, eqp = 1.05, edp = -0.1, V = 0.98, th = 0.2;
    const StatorSens J = stator_sens(gp, delta, V, th);
    const double h = 1e-7;
    auto col = [&](int var) {
        double a[5] = {delta, eqp, edp, V, th};
        double b[5] = {delta, eqp, edp, V, th};
        a[var] += h;
        b[var] -= h;
        const StatorOut p = stator(gp, a[0], a[1], a[2], a[3], a[4]);
        const StatorOut m = stator(gp, b[0], b[1], b[2], b[3], b[4]);
        return Eigen::Vector4d{(p.vd - m.vd) / (2 * h), (p.vq - m.vq) / (2 * h),
                               (p.id - m.id) / (2 * h), (p.iq - m.iq) / (2 * h)};
    };
    for (int var = 0; var < 5; ++var) {
        const Eigen::Vector4d fd = col(var);
        for (int row = 0; row < 4; ++row) {
            CHECK(J(row, var) == doctest::Approx(fd(row)).epsilon(1e-6));
        }
    }
}

TEST_CASE("generator equations vanish at a constructed equilibrium") {
    GeneratorParams gp;
    gp.h = 4.0;
    gp.d = 2.0;
    const double V = 1.0, th = 0.05;
    // choose iq, force edp = (xq - xqp) iq and pick delta so the stator
    // reproduces that iq, then back out pm and efd; all rates must vanish
    const double iq = 0.3;
    const double edp_eq = (gp.xq - gp.xqp) * iq;
    const double vd_eq = edp_eq + gp.xqp * iq;  // forces vd = edp + xqp iq
    const double delta_eq = th + std::asin(vd_eq / V);
    const StatorOut st = stator(gp, delta_eq, 1.1, edp_eq, V, th);
    const double pm = st.pe;  // omega = 0
    const double efd = st.i_f;
    const GenRates r = generator_derivatives(gp, st, edp_eq, 0.0, pm, efd, 2 * M_PI * 60);
    CHECK(r.d_delta == 0.0);
    CHECK(std::abs(r.d_omega) < 1e-15);
    CHECK(std::abs(r.d_eqp) < 1e-15);
    CHECK(std::abs(r.d_edp) < 1e-15);
}

TEST_CASE("swing acceleration follows the power imbalance") {
    GeneratorParams gp;
    gp.h = 5.0;
    gp.d = 1.0;
    StatorOut st{};
    st.pe = 0.8;
    const GenRates r = generator_derivatives(gp, st, 0.0, 0.02, 1.0, 0.0, 2 * M_PI * 60);
    CHECK(r.d_delta == doctest::Approx(2 * M_PI * 60 * 0.02).epsilon(1e-15));
    CHECK(r.d_omega == doctest::Approx((1.0 - 0.8 - 1.0 * 0.02) / 10.0).epsilon(1e-15));
}

TEST_CASE("regulator rates vanish at its fixed point and saturate outside the window") {
    AvrParams p;
    p.ka = 50.0;
    p.ta = 0.05;
    p.tr = 0.02;
    p.te = 0.5;
    p.efd_min = 0.0;
    p.efd_max = 5.0;
    const double V = 1.01, v_ref = 1.05;
    const double vr = p.ka * (v_ref - V);  // 2.0, inside [0, 5]
    const AvrRates r = avr_derivatives(p, V, vr, vr, V, v_ref, 0.0);
    CHECK(std::abs(r.d_vm) < 1e-15);
    CHECK(std::abs(r.d_vr) < 1e-15);
    CHECK(std::abs(r.d_efd) < 1e-15);
    CHECK_FALSE(r.efd_saturated);

    // limiter bias lowers the regulation error
    const AvrRates rb = avr_derivatives(p, V, vr, vr, V, v_ref, 0.01);
    CHECK(rb.d_vr == doctest::Approx(-p.ka * 0.01 / p.ta).epsilon(1e-12));

    // vr beyond the ceiling: exciter sees the clamp, flag raised
    const AvrRates rs = avr_derivatives(p, V, 7.0, 5.0, V, v_ref, 0.0);
    CHECK(rs.efd_saturated);
    CHECK(std::abs(rs.d_efd) < 1e-15);
}

TEST_CASE("limiter integrator ramps when active and decays when released") {
    OxlParams p;
    p.if_lim = 2.0;
    p.k_oxl = 10.0;
    p.t_reset = 5.0;
    CHECK(oxl_rate(p, 0.1, 2.3, true, false) == doctest::Approx(10.0 * 0.3).epsilon(1e-15));
    CHECK(oxl_rate(p, 0.1, 2.3, false, false) == doctest::Approx(-0.1 / 5.0).epsilon(1e-15));
    // anti-windup floor holds the state at its lower bound
    CHECK(oxl_rate(p, 0.0, 1.5, true, true) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("governor droop gives p_m = p_ref - omega / R in steady state") {
    GovernorParams p;
    p.droop = 0.05;
    p.tg = 0.5;
    p.ts = 2.0;
    p.p_max = 10.0;
    const double omega = 0.01, p_ref = 1.0;
    const double pg_star = p_ref - omega / p.droop;  // 0.8
    CHECK(pg_star == doctest::Approx(0.8).epsilon(1e-15));
    const GovRates r = governor_derivatives(p, pg_star, pg_star, omega, p_ref);
    CHECK(std::abs(r.d_pg) < 1e-15);
    CHECK(std::abs(r.d_pm) < 1e-15);
    CHECK_FALSE(r.pm_saturated);

    // request above the valve limit: servo tracks the clamp only
    GovernorParams q = p;
    q.p_max = 0.7;
    const GovRates rs = governor_derivatives(q, 0.9, 0.7, 0.0, 1.0);
    CHECK(rs.pm_saturated);
    CHECK(std::abs(rs.d_pm) < 1e-15);
}

TEST_CASE("recovery load at nominal voltage and zero state is quiescent") {
    RecoveryLoadParams p;
    p.tp = 60.0;
    p.tq = 60.0;
    const double p0 = 0.5, q0 = 0.2;
    const RecoveryLoadOut o = recovery_load(p, 0.0, 0.0, 1.0, p0, q0);
    CHECK(o.d_xp == 0.0);
    CHECK(o.d_xq == 0.0);
    CHECK(o.p == doctest::Approx(p0).epsilon(1e-15));
    CHECK(o.q == doctest::Approx(q0).epsilon(1e-15));
}

TEST_CASE("recovery load equilibrium state and transient jump match the closed form") {
    RecoveryLoadParams p;
    p.tp = 60.0;
    p.tq = 60.0;
    const double p0 = 0.5, q0 = 0.2, V = 0.95;
    // x_p* = T_p p0 (V^alpha_s - V^alpha_t)
    const double xp_star = p.tp * p0 * (std::pow(V, p.alpha_s) - std::pow(V, p.alpha_t));
    const double xq_star = p.tq * q0 * (std::pow(V, p.beta_s) - std::pow(V, p.beta_t));
    const RecoveryLoadOut eq = recovery_load(p, xp_star, xq_star, V, p0, q0);
    CHECK(std::abs(eq.d_xp) < 1e-15);
    CHECK(std::abs(eq.d_xq) < 1e-15);
    // recovered steady-state power is the alpha_s characteristic
    CHECK(eq.p == doctest::Approx(p0 * std::pow(V, p.alpha_s)).epsilon(1e-12));

    // right after a step with unrecovered state, load follows the transient exponent
    const RecoveryLoadOut tr = recovery_load(p, 0.0, 0.0, V, p0, q0);
    CHECK(tr.p == doctest::Approx(p0 * V * V).epsilon(1e-12));
}

TEST_CASE("tap transition honors deadband, direction and end stops") {
    LtcParams p;
    p.v_ref = 1.0;
    p.deadband = 0.01;
    p.n_min = 0.85;
    p.n_max = 1.15;
    p.dn = 0.0125;

    const LtcDecision in_band = ltc_transition(p, 1.0, 1.005);
    CHECK_FALSE(in_band.changed);
    CHECK_FALSE(in_band.at_limit);
    CHECK(in_band.n == 1.0);

    const LtcDecision low = ltc_transition(p, 1.0, 0.95);
    CHECK(low.changed);
    CHECK(low.n == doctest::Approx(0.9875).epsilon(1e-15));

    const LtcDecision high = ltc_transition(p, 1.0, 1.05);
    CHECK(high.changed);
    CHECK(high.n == doctest::Approx(1.0125).epsilon(1e-15));

    const LtcDecision stuck = ltc_transition(p, p.n_min, 0.9);
    CHECK_FALSE(stuck.changed);
    CHECK(stuck.at_limit);
    CHECK(stuck.n == p.n_min);

    // last step clips to the stop instead of overshooting
    const LtcDecision clip = ltc_transition(p, 0.855, 0.9);
    CHECK(clip.changed);
    CHECK(clip.n == p.n_min);
}
