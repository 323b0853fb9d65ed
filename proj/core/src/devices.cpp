#include "psim/devices.hpp"

#include <cmath>

namespace psim::dev {

StatorOut stator(const GeneratorParams& gp, double delta, double eqp, double edp,
                 double V, double th) {
    StatorOut o{};
    const double a = delta - th;
    o.vd = V * std::sin(a);
    o.vq = V * std::cos(a);
    o.id = (eqp - o.vq) / gp.xdp;
    o.iq = (o.vd - edp) / gp.xqp;
    o.pe = o.vd * o.id + o.vq * o.iq;
    o.qe = o.vq * o.id - o.vd * o.iq;
    o.i_f = eqp + (gp.xd - gp.xdp) * o.id;
    return o;
}

StatorSens stator_sens(const GeneratorParams& gp, double delta, double V, double th) {
    StatorSens J = StatorSens::Zero();
    const double a = delta - th;
    const double s = std::sin(a), c = std::cos(a);
    // rows: vd, vq, id, iq ; cols: delta, eqp, edp, V, th
    J(0, 0) = V * c;   // dvd/ddelta
    J(0, 3) = s;       // dvd/dV
    J(0, 4) = -V * c;  // dvd/dth
    J(1, 0) = -V * s;
    J(1, 3) = c;
    J(1, 4) = V * s;
    // id = (eqp - vq)/xdp
    J.row(2) = -J.row(1) / gp.xdp;
    J(2, 1) += 1.0 / gp.xdp;
    // iq = (vd - edp)/xqp
    J.row(3) = J.row(0) / gp.xqp;
    J(3, 2) -= 1.0 / gp.xqp;
    return J;
}

GenRates generator_derivatives(const GeneratorParams& gp, const StatorOut& st,
                               double edp, double omega, double pm, double efd,
                               double omega_s) {
    GenRates r{};
    r.d_delta = omega_s * omega;
    r.d_omega = (pm - st.pe - gp.d * omega) / (2.0 * gp.h);
    r.d_eqp = (-st.i_f + efd) / gp.td0p;  // i_f = eqp + (xd - xdp) id
    r.d_edp = (-edp + (gp.xq - gp.xqp) * st.iq) / gp.tq0p;
    return r;
}

AvrRates avr_derivatives(const AvrParams& p, double vm, double vr, double efd,
                         double V, double v_ref, double v_oxl) {
    AvrRates r{};
    r.d_vm = (V - vm) / p.tr;
    r.d_vr = (p.ka * (v_ref - vm - v_oxl) - vr) / p.ta;
    const double vr_sat = clamp(vr, p.efd_min, p.efd_max);
    r.d_efd = (vr_sat - efd) / p.te;
    r.efd_saturated = vr_sat != vr;
    return r;
}

double oxl_rate(const OxlParams& p, double v_oxl, double i_f, bool active, bool floored) {
    if (active && !floored) return p.k_oxl * (i_f - p.if_lim);
    return -v_oxl / p.t_reset;
}

GovRates governor_derivatives(const GovernorParams& p, double pg, double pm,
                              double omega, double p_ref) {
    GovRates r{};
    r.d_pg = ((p_ref - omega / p.droop) - pg) / p.tg;
    const double pg_sat = clamp(pg, 0.0, p.p_max);
    r.d_pm = (pg_sat - pm) / p.ts;
    r.pm_saturated = pg_sat != pg;
    return r;
}

RecoveryLoadOut recovery_load(const RecoveryLoadParams& p, double xp, double xq,
                              double V, double p0, double q0) {
    RecoveryLoadOut o{};
    const double vas = std::pow(V, p.alpha_s), vat = std::pow(V, p.alpha_t);
    const double vbs = std::pow(V, p.beta_s), vbt = std::pow(V, p.beta_t);
    o.d_xp = -xp / p.tp + p0 * (vas - vat);
    o.d_xq = -xq / p.tq + q0 * (vbs - vbt);
    o.p = xp / p.tp + p0 * vat;
    o.q = xq / p.tq + q0 * vbt;
    return o;
}

LtcDecision ltc_transition(const LtcParams& p, double n, double v_controlled) {
    LtcDecision d{n};
    const double eps = 1e-12;
    if (v_controlled < p.v_ref - p.deadband) {
        if (n > p.n_min + eps) {
            d.n = std::max(n - p.dn, p.n_min);
            d.changed = true;
        } else {
            d.at_limit = true;
        }
    } else if (v_controlled > p.v_ref + p.deadband) {
        if (n < p.n_max - eps) {
            d.n = std::min(n + p.dn, p.n_max);
            d.changed = true;
        } else {
            d.at_limit = true;
        }
    }
    return d;
}

}  // namespace psim::dev
