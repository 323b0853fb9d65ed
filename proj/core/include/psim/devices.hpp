#pragma once

#include <Eigen/Dense>

#include "psim/case.hpp"

namespace psim::dev {

inline double clamp(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

/// Stator quantities of the two-axis machine with r_a = 0, closed form:
///   v_d = V sin(delta-theta), v_q = V cos(delta-theta)
///   i_d = (e'_q - v_q)/x'_d,  i_q = (v_d - e'_d)/x'_q
struct StatorOut {
    double vd, vq, id, iq;
    double pe;   // terminal active injection = air-gap torque (r_a = 0)
    double qe;   // terminal reactive injection
    double i_f;  // field current readout e'_q + (x_d - x'_d) i_d
};

StatorOut stator(const GeneratorParams& gp, double delta, double eqp, double edp,
                 double V, double th);

/// Sensitivities of (vd, vq, id, iq) wrt (delta, eqp, edp, V, th).
using StatorSens = Eigen::Matrix<double, 4, 5>;
StatorSens stator_sens(const GeneratorParams& gp, double delta, double V, double th);

struct GenRates {
    double d_delta, d_omega, d_eqp, d_edp;
};

GenRates generator_derivatives(const GeneratorParams& gp, const StatorOut& st,
                               double edp, double omega, double pm, double efd,
                               double omega_s);

struct AvrRates {
    double d_vm, d_vr, d_efd;
    bool efd_saturated = false;  // regulator output outside the field window
};

/// Three-state regulator; the OXL signal subtracts from the voltage error.
/// The exciter integrates toward the regulator output saturated into
/// [efd_min, efd_max], which keeps the field voltage inside its window
/// without a discontinuous anti-windup branch.
AvrRates avr_derivatives(const AvrParams& p, double vm, double vr, double efd,
                         double V, double v_ref, double v_oxl);

/// Slow OXL state rate. `active` is the pickup-timer verdict kept by the
/// host model; the limiter integrates only once the delay has elapsed.
/// `floored` latches the one-sided floor at zero between steps.
double oxl_rate(const OxlParams& p, double v_oxl, double i_f, bool active, bool floored);

struct GovRates {
    double d_pg, d_pm;
    bool pm_saturated = false;
};

/// Droop governor; the servo tracks the setpoint saturated into
/// [0, p_max], the continuous counterpart of a mechanical stop.
GovRates governor_derivatives(const GovernorParams& p, double pg, double pm,
                              double omega, double p_ref);

struct RecoveryLoadOut {
    double d_xp, d_xq;
    double p, q;  // consumed power
};

RecoveryLoadOut recovery_load(const RecoveryLoadParams& p, double xp, double xq,
                              double V, double p0, double q0);

struct LtcDecision {
    double n;
    bool changed = false;
    bool at_limit = false;
};

/// Tap decision at a due instant. Lowering n raises the controlled
/// (secondary) voltage, so an under-voltage steps the tap down.
LtcDecision ltc_transition(const LtcParams& p, double n, double v_controlled);

}  // namespace psim::dev
