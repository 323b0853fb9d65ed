#pragma once

#include <optional>
#include <string>
#include <vector>

namespace psim {

enum class BusKind { slack, generator, load };

struct Bus {
    int id = 0;
    BusKind kind = BusKind::load;
    double v_set = 1.0;   // setpoint for slack / PV-like buses
    double gs = 0.0;      // shunt conductance, pu
    double bs = 0.0;      // shunt susceptance, pu
    double p_load = 0.0;  // static load, pu (consumed)
    double q_load = 0.0;
};

struct Branch {
    std::string id;
    int from = 0;
    int to = 0;
    double r = 0.0;
    double x = 0.0;    // must be nonzero
    double b = 0.0;    // total line charging
    double tap = 1.0;  // off-nominal ratio, from side
    bool in_service = true;
};

struct AvrParams {
    double ka = 100.0;  // regulator gain
    double ta = 0.05;   // regulator time constant, s
    double tr = 0.02;   // voltage measurement lag, s
    double te = 0.5;    // exciter lag, s
    double efd_min = 0.0;
    double efd_max = 6.0;
};

struct OxlParams {
    double if_lim = 2.0;    // field current limit, pu
    double t_delay = 40.0;  // pickup delay, s
    double k_oxl = 1.0;     // integration gain, 1/s
    double t_reset = 5.0;   // decay constant when released, s
    double hysteresis_frac = 0.02;  // reset band as fraction of if_lim
};

struct GovernorParams {
    double droop = 0.05;
    double tg = 0.5;   // governor lag, s
    double ts = 2.0;   // servo lag, s
    double p_max = 10.0;
};

struct GeneratorParams {
    int bus = 0;
    double h = 4.0;  // inertia constant, s
    double d = 1.0;  // damping, pu torque per pu speed
    double xd = 1.8;
    double xq = 1.7;
    double xdp = 0.3;   // x'_d
    double xqp = 0.55;  // x'_q
    double td0p = 6.0;  // T'_d0, s
    double tq0p = 1.0;  // T'_q0, s
    double p_set = 0.0;           // dispatch for PV-like buses, pu
    std::optional<AvrParams> avr;  // constant e_fd when absent
    std::optional<OxlParams> oxl;
    std::optional<GovernorParams> governor;
};

struct RecoveryLoadParams {
    int bus = 0;
    double tp = 60.0;  // active recovery time constant, s
    double tq = 60.0;
    double alpha_s = 0.0;  // steady-state exponent, P
    double alpha_t = 2.0;  // transient exponent, P
    double beta_s = 0.0;
    double beta_t = 2.0;
};

struct LtcParams {
    std::string branch;  // branch carrying the tap
    int controlled_bus = 0;
    double v_ref = 1.0;
    double deadband = 0.01;  // half-width, pu
    double n_min = 0.8;
    double n_max = 1.2;
    double dn = 0.0125;   // tap step
    double t_d0 = 20.0;   // initial delay, s
    double t_step = 10.0; // fixed tapping delay, s
};

/// Divergence bounds realizing the study region U.
struct StudyBounds {
    double omega_max = 0.2;     // pu speed deviation
    double v_min = 0.3;         // pu bus voltage
    double state_abs_max = 1e3; // catch-all on every variable
};

struct Case {
    std::string name;
    double base_mva = 100.0;
    double f_hz = 60.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<GeneratorParams> generators;
    std::vector<RecoveryLoadParams> recovery_loads;
    std::vector<LtcParams> ltcs;
    StudyBounds bounds;
};

struct ScheduledEvent {
    double t = 0.0;
    std::string type;    // "branch_trip" | "load_step"
    std::string branch;  // for branch_trip
    int bus = 0;         // for load_step
    double dp = 0.0;
    double dq = 0.0;
};

struct EventSchedule {
    std::vector<ScheduledEvent> events;  // sorted by time
};

}  // namespace psim
