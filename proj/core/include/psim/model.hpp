#pragma once

#include <memory>
#include <string>
#include <vector>

#include "psim/types.hpp"

namespace psim {

struct DiscreteUpdate {
    bool changed = false;
    int n_devices_changed = 0;
    std::string detail;
};

/// Residual / Jacobian surface of a two-time-scale DAE
///   z_c' = h_c(z_c, z_d, x, y)
///   z_d(k) = h_d(z_c, z_d(k-1), x, y)   (at distinct instants)
///   x'   = f(z_c, z_d, x, y)
///   0    = g(z_c, z_d, x, y)
/// Residual evaluation is pure; the discrete bookkeeping (timers,
/// limiter pickup) mutates only through the explicit hooks below, which
/// the engines call at step boundaries.
class DynamicModel {
  public:
    virtual ~DynamicModel() = default;

    virtual Dims dims() const = 0;
    virtual void eval_hc(const StatePartition& s, Vec& out) const = 0;
    virtual void eval_f(const StatePartition& s, Vec& out) const = 0;
    virtual void eval_g(const StatePartition& s, Vec& out) const = 0;
    virtual void eval_jacobians(const StatePartition& s, JacobianBlocks& out) const = 0;

    /// Accumulates device timers after an accepted step ending at t.
    virtual void update_timers(const StatePartition& /*s*/, double /*t*/, double /*dt*/) {}

    /// True when at least one discrete device is due to jump at t.
    virtual bool discrete_due(const StatePartition& /*s*/, double /*t*/) const { return false; }

    /// Applies all due jumps to z_d atomically (one event instant).
    virtual DiscreteUpdate apply_discrete(StatePartition& /*s*/, double /*t*/) { return {}; }

    /// Exogenous topology / load events from the schedule.
    virtual void apply_scheduled_event(const struct ScheduledEvent& /*ev*/) {}

    /// Opaque snapshot of the discrete bookkeeping, for checkpoints.
    virtual std::vector<double> status_snapshot() const { return {}; }
    virtual void status_restore(const std::vector<double>& /*snap*/) {}

    /// Indices of OXL slow states inside z_c (deviation sentinels).
    virtual std::vector<int> oxl_zc_indices() const { return {}; }

    /// True when any generator runs at/over its field-current limit.
    virtual bool any_oxl_engaged(const StatePartition& /*s*/) const { return false; }

    /// Divergence check against the study-region bounds.
    virtual bool within_bounds(const StatePartition& /*s*/) const { return true; }

    virtual std::vector<std::string> names_zc() const;
    virtual std::vector<std::string> names_zd() const;
    virtual std::vector<std::string> names_x() const;
    virtual std::vector<std::string> names_y() const;

    /// Time-scale ratio epsilon = 1 / max device time constant (reporting only).
    virtual double epsilon() const { return 1.0; }
};

/// Full simulation state: continuous/discrete variables plus the model's
/// discrete bookkeeping, enough to restart a run deterministically.
struct SimState {
    double t = 0.0;
    StatePartition part;
    std::vector<double> status;
};

}  // namespace psim
