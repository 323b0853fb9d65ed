#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace psim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

/// Four-way state split of the long-term model: continuous slow (z_c),
/// discrete slow (z_d), fast (x) and algebraic (y) variables.
struct StatePartition {
    Vec z_c;
    Vec z_d;
    Vec x;
    Vec y;

    bool same_dims(const StatePartition& o) const {
        return z_c.size() == o.z_c.size() && z_d.size() == o.z_d.size() &&
               x.size() == o.x.size() && y.size() == o.y.size();
    }
};

struct Dims {
    int n_zc = 0;
    int n_zd = 0;
    int n_x = 0;
    int n_y = 0;
};

/// Block Jacobians of (h_c, f, g) with respect to (z_c, x, y).
/// z_d is piecewise constant between jumps and never differentiated.
struct JacobianBlocks {
    Mat dhc_dzc, dhc_dx, dhc_dy;
    Mat df_dzc, df_dx, df_dy;
    Mat dg_dzc, dg_dx, dg_dy;

    void resize(const Dims& d) {
        dhc_dzc.setZero(d.n_zc, d.n_zc);
        dhc_dx.setZero(d.n_zc, d.n_x);
        dhc_dy.setZero(d.n_zc, d.n_y);
        df_dzc.setZero(d.n_x, d.n_zc);
        df_dx.setZero(d.n_x, d.n_x);
        df_dy.setZero(d.n_x, d.n_y);
        dg_dzc.setZero(d.n_y, d.n_zc);
        dg_dx.setZero(d.n_y, d.n_x);
        dg_dy.setZero(d.n_y, d.n_y);
    }
};

enum class Termination {
    completed,
    short_term_unstable,
    newton_failure,
    singularity,
};

std::string to_string(Termination t);

enum class EventKind {
    fault,        // scheduled exogenous event (line trip, load step)
    jump,         // discrete device jump (k-th)
    mode_switch,  // engine handover in the hybrid model
};

struct TraceEvent {
    double t = 0.0;
    int sample_index = -1;
    EventKind kind = EventKind::fault;
    int k = -1;  // jump counter, -1 when not a jump
    std::string detail;
};

struct TraceSample {
    double t = 0.0;
    StatePartition state;
};

/// Time-stamped state sequence with event annotations.
struct Trace {
    std::vector<TraceSample> samples;
    std::vector<TraceEvent> events;
    Termination termination = Termination::completed;

    void add_sample(double t, const StatePartition& s) { samples.push_back({t, s}); }
    void add_event(double t, EventKind kind, int k, std::string detail) {
        events.push_back({t, static_cast<int>(samples.size()) - 1, kind, k, std::move(detail)});
    }
    const TraceSample& back() const { return samples.back(); }
    bool empty() const { return samples.empty(); }
};

}  // namespace psim
