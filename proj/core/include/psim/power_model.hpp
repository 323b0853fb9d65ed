#pragma once

#include <vector>

#include "psim/case.hpp"
#include "psim/devices.hpp"
#include "psim/model.hpp"
#include "psim/network.hpp"

namespace psim {

/// Multi-machine long-term stability model assembled from the case:
///   z_c = [v_oxl per OXL | p_g, p_m per governor | x_p, x_q per recovery load]
///   z_d = [tap ratio per LTC]
///   x   = per generator: delta, omega, e'_q, e'_d (+ v_m, v_r, e_fd with AVR)
///   y   = per bus: V, theta
/// g holds the per-bus P/Q mismatch with the slack rows replaced by
/// theta/V pinning so the system stays square.
class PowerSystemModel : public DynamicModel {
  public:
    struct GenLayout {
        GeneratorParams p;
        int bus_idx = 0;
        int x_off = 0;
        int n_x = 4;       // 7 with AVR
        int oxl_zc = -1;   // v_oxl slot in z_c
        int gov_zc = -1;   // p_g slot; p_m at gov_zc + 1
        int oxl_ord = -1;  // position among OXL-equipped generators
        // operating-point data filled by initialization
        double v_ref = 1.0;
        double efd_const = 1.0;  // used when no AVR
        double p_ref = 0.0;      // used when no governor
    };
    struct LoadLayout {
        RecoveryLoadParams p;
        int bus_idx = 0;
        int zc_off = 0;  // x_p; x_q at zc_off + 1
        double p_nom = 0.0;  // nominal bus load taken over from the case
        double q_nom = 0.0;
        double p0 = 0.0;
        double q0 = 0.0;
    };
    struct LtcLayout {
        LtcParams p;
        int branch_idx = 0;
        int zd_off = 0;
        int controlled_idx = 0;
    };

    explicit PowerSystemModel(const Case& c);

    Dims dims() const override { return dims_; }
    void eval_hc(const StatePartition& s, Vec& out) const override;
    void eval_f(const StatePartition& s, Vec& out) const override;
    void eval_g(const StatePartition& s, Vec& out) const override;
    void eval_jacobians(const StatePartition& s, JacobianBlocks& out) const override;

    void update_timers(const StatePartition& s, double t, double dt) override;
    bool discrete_due(const StatePartition& s, double t) const override;
    DiscreteUpdate apply_discrete(StatePartition& s, double t) override;
    void apply_scheduled_event(const ScheduledEvent& ev) override;

    std::vector<double> status_snapshot() const override;
    void status_restore(const std::vector<double>& snap) override;

    std::vector<int> oxl_zc_indices() const override;
    bool any_oxl_engaged(const StatePartition& s) const override;
    bool within_bounds(const StatePartition& s) const override;

    std::vector<std::string> names_zc() const override;
    std::vector<std::string> names_zd() const override;
    std::vector<std::string> names_x() const override;
    std::vector<std::string> names_y() const override;

    double epsilon() const override { return epsilon_; }

    // --- layout / readout surface (initialization, diagnostics, tests) ---
    const Case& case_data() const { return case_; }
    const BusIndex& bus_index() const { return index_; }
    const std::vector<GenLayout>& gens() const { return gens_; }
    const std::vector<LoadLayout>& loads() const { return loads_; }
    const std::vector<LtcLayout>& ltcs() const { return ltcs_; }
    const std::vector<Branch>& working_branches() const { return branches_; }
    int slack_idx() const { return slack_idx_; }
    int y_v(int bus_idx) const { return 2 * bus_idx; }
    int y_th(int bus_idx) const { return 2 * bus_idx + 1; }
    double omega_base() const { return omega_s_; }

    GenLayout& gen_mutable(int i) { return gens_[i]; }
    LoadLayout& load_mutable(int i) { return loads_[i]; }

    dev::StatorOut stator_of(const StatePartition& s, int gi) const;
    bool oxl_active(int gi) const;
    bool ltc_at_limit(int li) const { return ltc_at_limit_[li] != 0; }

    /// Admittance matrix consistent with z_d taps and current topology.
    const CMat& admittance(const StatePartition& s) const;

    /// Active-power balance residual: generation - load - losses.
    double power_balance(const StatePartition& s) const;

    StatePartition make_state() const;

  private:
    void rebuild_admittance(const StatePartition& s) const;
    void injections(const StatePartition& s, Vec& P, Vec& Q) const;

    Case case_;
    BusIndex index_;
    std::vector<Branch> branches_;  // working copy, trips mutate in_service
    std::vector<GenLayout> gens_;
    std::vector<LoadLayout> loads_;
    std::vector<LtcLayout> ltcs_;
    Vec p_static_, q_static_;  // constant-power load per bus
    Dims dims_;
    int slack_idx_ = 0;
    double omega_s_ = 2.0 * 3.141592653589793 * 60.0;
    double epsilon_ = 1.0;
    int n_oxl_ = 0;

    // discrete bookkeeping
    std::vector<double> oxl_timer_;
    std::vector<int> oxl_active_;
    std::vector<int> oxl_floored_;
    std::vector<double> ltc_timer_;
    std::vector<int> ltc_phase_;  // 0 in-band, 1 initial delay, 2 stepping
    std::vector<int> ltc_at_limit_;
    int topo_version_ = 0;

    // admittance cache keyed by (z_d, topology version)
    mutable CMat y_cache_;
    mutable Vec zd_cache_;
    mutable int topo_cache_ = -1;
};

}  // namespace psim
