#include "psim/power_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psim {

namespace {
constexpr double kTimerEps = 1e-9;

Eigen::Matrix<double, 1, 4> pe_weights(const dev::StatorOut& st) {
    // pe = vd*id + vq*iq; order (vd, vq, id, iq)
    return {st.id, st.iq, st.vd, st.vq};
}
Eigen::Matrix<double, 1, 4> qe_weights(const dev::StatorOut& st) {
    // qe = vq*id - vd*iq
    return {-st.iq, st.id, st.vq, -st.vd};
}
}  // namespace

PowerSystemModel::PowerSystemModel(const Case& c)
    : case_(c), index_(BusIndex::build(c.buses)), branches_(c.branches) {
    const int n_bus = index_.size();

    int n_slack = 0;
    for (int b = 0; b < n_bus; ++b) {
        if (case_.buses[b].kind == BusKind::slack) {
            slack_idx_ = b;
            ++n_slack;
        }
    }
    if (n_slack != 1) throw std::invalid_argument("case must have exactly one slack bus");

    omega_s_ = 2.0 * 3.141592653589793 * case_.f_hz;

    p_static_.setZero(n_bus);
    q_static_.setZero(n_bus);
    for (int b = 0; b < n_bus; ++b) {
        p_static_(b) = case_.buses[b].p_load;
        q_static_(b) = case_.buses[b].q_load;
    }

    int zc = 0, x_off = 0;
    for (const auto& gp : case_.generators) {
        GenLayout gl;
        gl.p = gp;
        gl.bus_idx = index_.at(gp.bus);
        gl.x_off = x_off;
        gl.n_x = gp.avr ? 7 : 4;
        x_off += gl.n_x;
        if (gp.oxl) {
            gl.oxl_zc = zc++;
            gl.oxl_ord = n_oxl_++;
        }
        gens_.push_back(gl);
    }
    for (auto& gl : gens_) {
        if (gl.p.governor) {
            gl.gov_zc = zc;
            zc += 2;
        }
    }
    for (const auto& rp : case_.recovery_loads) {
        LoadLayout ll;
        ll.p = rp;
        ll.bus_idx = index_.at(rp.bus);
        ll.zc_off = zc;
        zc += 2;
        // recovery load takes over the bus's nominal load
        ll.p_nom = p_static_(ll.bus_idx);
        ll.q_nom = q_static_(ll.bus_idx);
        ll.p0 = ll.p_nom;
        ll.q0 = ll.q_nom;
        p_static_(ll.bus_idx) = 0.0;
        q_static_(ll.bus_idx) = 0.0;
        loads_.push_back(ll);
    }
    int zd = 0;
    for (const auto& lp : case_.ltcs) {
        LtcLayout tl;
        tl.p = lp;
        tl.branch_idx = -1;
        for (int i = 0; i < static_cast<int>(branches_.size()); ++i)
            if (branches_[i].id == lp.branch) tl.branch_idx = i;
        if (tl.branch_idx < 0) throw std::invalid_argument("ltc references unknown branch " + lp.branch);
        tl.controlled_idx = index_.at(lp.controlled_bus);
        tl.zd_off = zd++;
        ltcs_.push_back(tl);
    }

    dims_ = {zc, zd, x_off, 2 * n_bus};

    oxl_timer_.assign(n_oxl_, 0.0);
    oxl_active_.assign(n_oxl_, 0);
    oxl_floored_.assign(n_oxl_, 0);
    ltc_timer_.assign(ltcs_.size(), 0.0);
    ltc_phase_.assign(ltcs_.size(), 0);
    ltc_at_limit_.assign(ltcs_.size(), 0);

    double t_max = 1.0;
    for (const auto& gl : gens_) {
        t_max = std::max({t_max, gl.p.td0p, gl.p.tq0p, 2.0 * gl.p.h});
        if (gl.p.avr) t_max = std::max({t_max, gl.p.avr->ta, gl.p.avr->tr, gl.p.avr->te});
        if (gl.p.governor) t_max = std::max({t_max, gl.p.governor->tg, gl.p.governor->ts});
        if (gl.p.oxl) t_max = std::max(t_max, 1.0 / std::max(gl.p.oxl->k_oxl, 1e-6));
    }
    for (const auto& ll : loads_) t_max = std::max({t_max, ll.p.tp, ll.p.tq});
    epsilon_ = 1.0 / t_max;
}

StatePartition PowerSystemModel::make_state() const {
    StatePartition s;
    s.z_c.setZero(dims_.n_zc);
    s.z_d.setZero(dims_.n_zd);
    s.x.setZero(dims_.n_x);
    s.y.setZero(dims_.n_y);
    for (const auto& tl : ltcs_) s.z_d(tl.zd_off) = branches_[tl.branch_idx].tap;
    for (int b = 0; b < index_.size(); ++b) s.y(y_v(b)) = 1.0;
    return s;
}

void PowerSystemModel::rebuild_admittance(const StatePartition& s) const {
    std::vector<Branch> br = branches_;
    for (const auto& tl : ltcs_) br[tl.branch_idx].tap = s.z_d(tl.zd_off);
    y_cache_ = build_admittance(case_.buses, br, index_).Y;
    zd_cache_ = s.z_d;
    topo_cache_ = topo_version_;
}

const CMat& PowerSystemModel::admittance(const StatePartition& s) const {
    if (topo_cache_ != topo_version_ || zd_cache_.size() != s.z_d.size() ||
        (zd_cache_.size() > 0 && zd_cache_ != s.z_d) || y_cache_.rows() == 0) {
        rebuild_admittance(s);
    }
    return y_cache_;
}

dev::StatorOut PowerSystemModel::stator_of(const StatePartition& s, int gi) const {
    const auto& gl = gens_[gi];
    const int xo = gl.x_off;
    return dev::stator(gl.p, s.x(xo), s.x(xo + 2), s.x(xo + 3), s.y(y_v(gl.bus_idx)),
                       s.y(y_th(gl.bus_idx)));
}

bool PowerSystemModel::oxl_active(int gi) const {
    return gens_[gi].oxl_ord >= 0 && oxl_active_[gens_[gi].oxl_ord] != 0;
}

void PowerSystemModel::eval_hc(const StatePartition& s, Vec& out) const {
    out.setZero(dims_.n_zc);
    for (int gi = 0; gi < static_cast<int>(gens_.size()); ++gi) {
        const auto& gl = gens_[gi];
        if (gl.oxl_zc >= 0) {
            const auto st = stator_of(s, gi);
            out(gl.oxl_zc) = dev::oxl_rate(*gl.p.oxl, s.z_c(gl.oxl_zc), st.i_f,
                                           oxl_active_[gl.oxl_ord] != 0,
                                           oxl_floored_[gl.oxl_ord] != 0);
        }
        if (gl.gov_zc >= 0) {
            const auto gr = dev::governor_derivatives(*gl.p.governor, s.z_c(gl.gov_zc),
                                                      s.z_c(gl.gov_zc + 1), s.x(gl.x_off + 1),
                                                      gl.p_ref);
            out(gl.gov_zc) = gr.d_pg;
            out(gl.gov_zc + 1) = gr.d_pm;
        }
    }
    for (const auto& ll : loads_) {
        const auto lo = dev::recovery_load(ll.p, s.z_c(ll.zc_off), s.z_c(ll.zc_off + 1),
                                           s.y(y_v(ll.bus_idx)), ll.p0, ll.q0);
        out(ll.zc_off) = lo.d_xp;
        out(ll.zc_off + 1) = lo.d_xq;
    }
}

void PowerSystemModel::eval_f(const StatePartition& s, Vec& out) const {
    out.setZero(dims_.n_x);
    for (int gi = 0; gi < static_cast<int>(gens_.size()); ++gi) {
        const auto& gl = gens_[gi];
        const int xo = gl.x_off;
        const auto st = stator_of(s, gi);
        const double pm = gl.gov_zc >= 0 ? s.z_c(gl.gov_zc + 1) : gl.p_ref;
        const double efd = gl.p.avr ? s.x(xo + 6) : gl.efd_const;
        const auto gr =
            dev::generator_derivatives(gl.p, st, s.x(xo + 3), s.x(xo + 1), pm, efd, omega_s_);
        out(xo) = gr.d_delta;
        out(xo + 1) = gr.d_omega;
        out(xo + 2) = gr.d_eqp;
        out(xo + 3) = gr.d_edp;
        if (gl.p.avr) {
            const double voxl = gl.oxl_zc >= 0 ? s.z_c(gl.oxl_zc) : 0.0;
            const auto ar = dev::avr_derivatives(*gl.p.avr, s.x(xo + 4), s.x(xo + 5), s.x(xo + 6),
                                                 s.y(y_v(gl.bus_idx)), gl.v_ref, voxl);
            out(xo + 4) = ar.d_vm;
            out(xo + 5) = ar.d_vr;
            out(xo + 6) = ar.d_efd;
        }
    }
}

void PowerSystemModel::injections(const StatePartition& s, Vec& P, Vec& Q) const {
    const int n_bus = index_.size();
    P.setZero(n_bus);
    Q.setZero(n_bus);
    for (int gi = 0; gi < static_cast<int>(gens_.size()); ++gi) {
        const auto st = stator_of(s, gi);
        P(gens_[gi].bus_idx) += st.pe;
        Q(gens_[gi].bus_idx) += st.qe;
    }
    P -= p_static_;
    Q -= q_static_;
    for (const auto& ll : loads_) {
        const auto lo = dev::recovery_load(ll.p, s.z_c(ll.zc_off), s.z_c(ll.zc_off + 1),
                                           s.y(y_v(ll.bus_idx)), ll.p0, ll.q0);
        P(ll.bus_idx) -= lo.p;
        Q(ll.bus_idx) -= lo.q;
    }
}

void PowerSystemModel::eval_g(const StatePartition& s, Vec& out) const {
    const int n_bus = index_.size();
    out.setZero(dims_.n_y);
    Vec Pf, Qf, Pi, Qi;
    Vec V = Vec(n_bus), th = Vec(n_bus);
    for (int b = 0; b < n_bus; ++b) {
        V(b) = s.y(y_v(b));
        th(b) = s.y(y_th(b));
    }
    bus_power_flows(admittance(s), V, th, Pf, Qf);
    injections(s, Pi, Qi);
    for (int b = 0; b < n_bus; ++b) {
        out(2 * b) = Pi(b) - Pf(b);
        out(2 * b + 1) = Qi(b) - Qf(b);
    }
    // slack rows pinned: theta = 0, V = setpoint
    out(2 * slack_idx_) = th(slack_idx_);
    out(2 * slack_idx_ + 1) = V(slack_idx_) - case_.buses[slack_idx_].v_set;
}

void PowerSystemModel::eval_jacobians(const StatePartition& s, JacobianBlocks& J) const {
    J.resize(dims_);
    const int n_bus = index_.size();
    Vec V(n_bus), th(n_bus);
    for (int b = 0; b < n_bus; ++b) {
        V(b) = s.y(y_v(b));
        th(b) = s.y(y_th(b));
    }

    // network flow part of g
    Mat dP_dV, dP_dth, dQ_dV, dQ_dth;
    flow_jacobian(admittance(s), V, th, dP_dV, dP_dth, dQ_dV, dQ_dth);
    for (int i = 0; i < n_bus; ++i) {
        for (int j = 0; j < n_bus; ++j) {
            J.dg_dy(2 * i, 2 * j) -= dP_dV(i, j);
            J.dg_dy(2 * i, 2 * j + 1) -= dP_dth(i, j);
            J.dg_dy(2 * i + 1, 2 * j) -= dQ_dV(i, j);
            J.dg_dy(2 * i + 1, 2 * j + 1) -= dQ_dth(i, j);
        }
    }

    // scatter a gen-local 5-gradient (delta,eqp,edp,V,th) into block row
    auto scatter = [&](Mat& toX, Mat& toY, int row, int gi,
                       const Eigen::Matrix<double, 1, 5>& d) {
        const auto& gl = gens_[gi];
        toX(row, gl.x_off) += d(0);
        toX(row, gl.x_off + 2) += d(1);
        toX(row, gl.x_off + 3) += d(2);
        toY(row, y_v(gl.bus_idx)) += d(3);
        toY(row, y_th(gl.bus_idx)) += d(4);
    };

    for (int gi = 0; gi < static_cast<int>(gens_.size()); ++gi) {
        const auto& gl = gens_[gi];
        const int xo = gl.x_off;
        const int b = gl.bus_idx;
        const auto st = stator_of(s, gi);
        const dev::StatorSens SJ = dev::stator_sens(gl.p, s.x(xo), V(b), th(b));

        const Eigen::Matrix<double, 1, 5> d_pe = pe_weights(st) * SJ;
        const Eigen::Matrix<double, 1, 5> d_qe = qe_weights(st) * SJ;
        Eigen::Matrix<double, 1, 5> d_if = (gl.p.xd - gl.p.xdp) * SJ.row(2);
        d_if(1) += 1.0;  // direct e'_q term of i_f

        // f: delta row
        J.df_dx(xo, xo + 1) = omega_s_;
        // f: omega row
        const double inv2h = 1.0 / (2.0 * gl.p.h);
        scatter(J.df_dx, J.df_dy, xo + 1, gi, -inv2h * d_pe);
        J.df_dx(xo + 1, xo + 1) += -gl.p.d * inv2h;
        if (gl.gov_zc >= 0) J.df_dzc(xo + 1, gl.gov_zc + 1) = inv2h;
        // f: e'_q row = (-i_f + efd)/td0p
        scatter(J.df_dx, J.df_dy, xo + 2, gi, -d_if / gl.p.td0p);
        if (gl.p.avr) J.df_dx(xo + 2, xo + 6) = 1.0 / gl.p.td0p;
        // f: e'_d row = (-e'_d + (xq-xqp) iq)/tq0p
        scatter(J.df_dx, J.df_dy, xo + 3, gi, (gl.p.xq - gl.p.xqp) / gl.p.tq0p * SJ.row(3));
        J.df_dx(xo + 3, xo + 3) += -1.0 / gl.p.tq0p;

        if (gl.p.avr) {
            const auto& ap = *gl.p.avr;
            J.df_dx(xo + 4, xo + 4) = -1.0 / ap.tr;
            J.df_dy(xo + 4, y_v(b)) = 1.0 / ap.tr;
            J.df_dx(xo + 5, xo + 4) = -ap.ka / ap.ta;
            J.df_dx(xo + 5, xo + 5) = -1.0 / ap.ta;
            if (gl.oxl_zc >= 0) J.df_dzc(xo + 5, gl.oxl_zc) = -ap.ka / ap.ta;
            const double voxl = gl.oxl_zc >= 0 ? s.z_c(gl.oxl_zc) : 0.0;
            const double vr = s.x(xo + 5);
            if (vr > ap.efd_min && vr < ap.efd_max) J.df_dx(xo + 6, xo + 5) = 1.0 / ap.te;
            J.df_dx(xo + 6, xo + 6) = -1.0 / ap.te;
        }

        // g: generator injection at its bus
        scatter(J.dg_dx, J.dg_dy, 2 * b, gi, d_pe);
        scatter(J.dg_dx, J.dg_dy, 2 * b + 1, gi, d_qe);

        // h_c: OXL row
        if (gl.oxl_zc >= 0) {
            const auto& op = *gl.p.oxl;
            if (oxl_active_[gl.oxl_ord] && !oxl_floored_[gl.oxl_ord]) {
                scatter(J.dhc_dx, J.dhc_dy, gl.oxl_zc, gi, op.k_oxl * d_if);
            } else {
                J.dhc_dzc(gl.oxl_zc, gl.oxl_zc) = -1.0 / op.t_reset;
            }
        }

        // h_c: governor rows
        if (gl.gov_zc >= 0) {
            const auto& gp = *gl.p.governor;
            J.dhc_dx(gl.gov_zc, xo + 1) = -1.0 / (gp.droop * gp.tg);
            J.dhc_dzc(gl.gov_zc, gl.gov_zc) = -1.0 / gp.tg;
            const double pg = s.z_c(gl.gov_zc);
            if (pg > 0.0 && pg < gp.p_max)
                J.dhc_dzc(gl.gov_zc + 1, gl.gov_zc) = 1.0 / gp.ts;
            J.dhc_dzc(gl.gov_zc + 1, gl.gov_zc + 1) = -1.0 / gp.ts;
        }
    }

    for (const auto& ll : loads_) {
        const auto& lp = ll.p;
        const int b = ll.bus_idx;
        const double Vb = V(b);
        // h_c rows
        J.dhc_dzc(ll.zc_off, ll.zc_off) = -1.0 / lp.tp;
        J.dhc_dy(ll.zc_off, y_v(b)) =
            ll.p0 * (lp.alpha_s * std::pow(Vb, lp.alpha_s - 1.0) -
                     lp.alpha_t * std::pow(Vb, lp.alpha_t - 1.0));
        J.dhc_dzc(ll.zc_off + 1, ll.zc_off + 1) = -1.0 / lp.tq;
        J.dhc_dy(ll.zc_off + 1, y_v(b)) =
            ll.q0 * (lp.beta_s * std::pow(Vb, lp.beta_s - 1.0) -
                     lp.beta_t * std::pow(Vb, lp.beta_t - 1.0));
        // g rows: consumed power enters with negative sign
        J.dg_dzc(2 * b, ll.zc_off) = -1.0 / lp.tp;
        J.dg_dy(2 * b, y_v(b)) += -ll.p0 * lp.alpha_t * std::pow(Vb, lp.alpha_t - 1.0);
        J.dg_dzc(2 * b + 1, ll.zc_off + 1) = -1.0 / lp.tq;
        J.dg_dy(2 * b + 1, y_v(b)) += -ll.q0 * lp.beta_t * std::pow(Vb, lp.beta_t - 1.0);
    }

    // slack rows pinned
    J.dg_dx.row(2 * slack_idx_).setZero();
    J.dg_dzc.row(2 * slack_idx_).setZero();
    J.dg_dy.row(2 * slack_idx_).setZero();
    J.dg_dy(2 * slack_idx_, y_th(slack_idx_)) = 1.0;
    J.dg_dx.row(2 * slack_idx_ + 1).setZero();
    J.dg_dzc.row(2 * slack_idx_ + 1).setZero();
    J.dg_dy.row(2 * slack_idx_ + 1).setZero();
    J.dg_dy(2 * slack_idx_ + 1, y_v(slack_idx_)) = 1.0;
}

void PowerSystemModel::update_timers(const StatePartition& s, double /*t*/, double dt) {
    for (int gi = 0; gi < static_cast<int>(gens_.size()); ++gi) {
        const auto& gl = gens_[gi];
        if (gl.oxl_ord < 0) continue;
        const auto& op = *gl.p.oxl;
        const double i_f = stator_of(s, gi).i_f;
        const double release = op.if_lim * (1.0 - op.hysteresis_frac);
        if (oxl_active_[gl.oxl_ord]) {
            if (i_f <= release) {
                oxl_active_[gl.oxl_ord] = 0;
                oxl_floored_[gl.oxl_ord] = 0;
                oxl_timer_[gl.oxl_ord] = 0.0;
            } else {
                // one-sided floor: hold the limiter state at zero rather
                // than integrating it negative
                oxl_floored_[gl.oxl_ord] =
                    (s.z_c(gl.oxl_zc) <= 1e-12 && i_f < op.if_lim) ? 1 : 0;
            }
        } else {
            if (i_f > op.if_lim) {
                oxl_timer_[gl.oxl_ord] += dt;
                if (oxl_timer_[gl.oxl_ord] >= op.t_delay - kTimerEps)
                    oxl_active_[gl.oxl_ord] = 1;
            } else if (i_f <= release) {
                oxl_timer_[gl.oxl_ord] = 0.0;
            }
        }
    }
    for (int li = 0; li < static_cast<int>(ltcs_.size()); ++li) {
        const auto& tl = ltcs_[li];
        const double v = s.y(y_v(tl.controlled_idx));
        const bool in_band = std::abs(v - tl.p.v_ref) <= tl.p.deadband;
        if (in_band) {
            ltc_phase_[li] = 0;
            ltc_timer_[li] = 0.0;
            continue;
        }
        if (ltc_phase_[li] == 0) ltc_phase_[li] = 1;
        ltc_timer_[li] += dt;
        // a due-but-blocked tap latches the at-limit flag and rearms
        const double delay = ltc_phase_[li] == 1 ? tl.p.t_d0 : tl.p.t_step;
        if (ltc_timer_[li] >= delay - kTimerEps) {
            const auto d = dev::ltc_transition(tl.p, s.z_d(tl.zd_off), v);
            if (!d.changed) {
                if (d.at_limit) ltc_at_limit_[li] = 1;
                ltc_timer_[li] = 0.0;
                ltc_phase_[li] = 2;
            }
        }
    }
}

bool PowerSystemModel::discrete_due(const StatePartition& s, double /*t*/) const {
    for (int li = 0; li < static_cast<int>(ltcs_.size()); ++li) {
        const auto& tl = ltcs_[li];
        if (ltc_phase_[li] == 0) continue;
        const double delay = ltc_phase_[li] == 1 ? tl.p.t_d0 : tl.p.t_step;
        if (ltc_timer_[li] < delay - kTimerEps) continue;
        const auto d =
            dev::ltc_transition(tl.p, s.z_d(tl.zd_off), s.y(y_v(tl.controlled_idx)));
        if (d.changed) return true;
    }
    return false;
}

DiscreteUpdate PowerSystemModel::apply_discrete(StatePartition& s, double /*t*/) {
    DiscreteUpdate upd;
    for (int li = 0; li < static_cast<int>(ltcs_.size()); ++li) {
        const auto& tl = ltcs_[li];
        if (ltc_phase_[li] == 0) continue;
        const double delay = ltc_phase_[li] == 1 ? tl.p.t_d0 : tl.p.t_step;
        if (ltc_timer_[li] < delay - kTimerEps) continue;
        const auto d =
            dev::ltc_transition(tl.p, s.z_d(tl.zd_off), s.y(y_v(tl.controlled_idx)));
        ltc_timer_[li] = 0.0;
        ltc_phase_[li] = 2;
        if (d.changed) {
            s.z_d(tl.zd_off) = d.n;
            upd.changed = true;
            ++upd.n_devices_changed;
            if (!upd.detail.empty()) upd.detail += "; ";
            upd.detail += "ltc " + tl.p.branch + " tap -> " + std::to_string(d.n);
        }
        if (d.at_limit) ltc_at_limit_[li] = 1;
    }
    return upd;
}

void PowerSystemModel::apply_scheduled_event(const ScheduledEvent& ev) {
    if (ev.type == "branch_trip") {
        for (auto& br : branches_) {
            if (br.id == ev.branch) {
                if (br.in_service) {
                    br.in_service = false;
                    ++topo_version_;
                }
                return;
            }
        }
        throw std::invalid_argument("schedule references unknown branch " + ev.branch);
    }
    if (ev.type == "load_step") {
        const int b = index_.at(ev.bus);
        p_static_(b) += ev.dp;
        q_static_(b) += ev.dq;
        ++topo_version_;  // invalidates nothing but keeps bookkeeping uniform
        return;
    }
    throw std::invalid_argument("unknown scheduled event type " + ev.type);
}

std::vector<double> PowerSystemModel::status_snapshot() const {
    std::vector<double> v;
    for (int i = 0; i < n_oxl_; ++i) {
        v.push_back(oxl_timer_[i]);
        v.push_back(static_cast<double>(oxl_active_[i]));
        v.push_back(static_cast<double>(oxl_floored_[i]));
    }
    for (size_t i = 0; i < ltcs_.size(); ++i) {
        v.push_back(ltc_timer_[i]);
        v.push_back(static_cast<double>(ltc_phase_[i]));
        v.push_back(static_cast<double>(ltc_at_limit_[i]));
    }
    for (const auto& br : branches_) v.push_back(br.in_service ? 1.0 : 0.0);
    for (int b = 0; b < index_.size(); ++b) {
        v.push_back(p_static_(b));
        v.push_back(q_static_(b));
    }
    return v;
}

void PowerSystemModel::status_restore(const std::vector<double>& snap) {
    size_t i = 0;
    for (int k = 0; k < n_oxl_; ++k) {
        oxl_timer_[k] = snap.at(i++);
        oxl_active_[k] = static_cast<int>(snap.at(i++));
        oxl_floored_[k] = static_cast<int>(snap.at(i++));
    }
    for (size_t k = 0; k < ltcs_.size(); ++k) {
        ltc_timer_[k] = snap.at(i++);
        ltc_phase_[k] = static_cast<int>(snap.at(i++));
        ltc_at_limit_[k] = static_cast<int>(snap.at(i++));
    }
    bool topo_changed = false;
    for (auto& br : branches_) {
        const bool in = snap.at(i++) != 0.0;
        if (br.in_service != in) topo_changed = true;
        br.in_service = in;
    }
    for (int b = 0; b < index_.size(); ++b) {
        p_static_(b) = snap.at(i++);
        q_static_(b) = snap.at(i++);
    }
    if (topo_changed) ++topo_version_;
}

std::vector<int> PowerSystemModel::oxl_zc_indices() const {
    std::vector<int> v;
    for (const auto& gl : gens_)
        if (gl.oxl_zc >= 0) v.push_back(gl.oxl_zc);
    return v;
}

bool PowerSystemModel::any_oxl_engaged(const StatePartition& s) const {
    for (int gi = 0; gi < static_cast<int>(gens_.size()); ++gi) {
        const auto& gl = gens_[gi];
        if (gl.oxl_ord < 0) continue;
        if (oxl_active_[gl.oxl_ord]) return true;
        if (s.z_c(gl.oxl_zc) > 1e-9) return true;
        if (stator_of(s, gi).i_f > gl.p.oxl->if_lim) return true;
    }
    return false;
}

bool PowerSystemModel::within_bounds(const StatePartition& s) const {
    const auto& b = case_.bounds;
    auto finite_and_small = [&](const Vec& v) {
        return v.allFinite() && v.cwiseAbs().maxCoeff() <= b.state_abs_max;
    };
    if (s.z_c.size() > 0 && !finite_and_small(s.z_c)) return false;
    if (!finite_and_small(s.x) || !finite_and_small(s.y)) return false;
    for (const auto& gl : gens_)
        if (std::abs(s.x(gl.x_off + 1)) > b.omega_max) return false;
    for (int bi = 0; bi < index_.size(); ++bi)
        if (s.y(y_v(bi)) < b.v_min) return false;
    return true;
}

std::vector<std::string> PowerSystemModel::names_zc() const {
    std::vector<std::string> n(dims_.n_zc);
    for (const auto& gl : gens_) {
        const std::string tag = std::to_string(gl.p.bus);
        if (gl.oxl_zc >= 0) n[gl.oxl_zc] = "oxl" + tag + ".v_oxl";
        if (gl.gov_zc >= 0) {
            n[gl.gov_zc] = "gov" + tag + ".pg";
            n[gl.gov_zc + 1] = "gov" + tag + ".pm";
        }
    }
    for (const auto& ll : loads_) {
        const std::string tag = std::to_string(ll.p.bus);
        n[ll.zc_off] = "load" + tag + ".xp";
        n[ll.zc_off + 1] = "load" + tag + ".xq";
    }
    return n;
}

std::vector<std::string> PowerSystemModel::names_zd() const {
    std::vector<std::string> n(dims_.n_zd);
    for (const auto& tl : ltcs_) n[tl.zd_off] = "ltc" + tl.p.branch + ".n";
    return n;
}

std::vector<std::string> PowerSystemModel::names_x() const {
    std::vector<std::string> n(dims_.n_x);
    static const char* base[] = {"delta", "omega", "eqp", "edp", "vm", "vr", "efd"};
    for (const auto& gl : gens_) {
        for (int j = 0; j < gl.n_x; ++j)
            n[gl.x_off + j] = "gen" + std::to_string(gl.p.bus) + "." + base[j];
    }
    return n;
}

std::vector<std::string> PowerSystemModel::names_y() const {
    std::vector<std::string> n(dims_.n_y);
    for (int b = 0; b < index_.size(); ++b) {
        n[2 * b] = "bus" + std::to_string(index_.ids[b]) + ".V";
        n[2 * b + 1] = "bus" + std::to_string(index_.ids[b]) + ".theta";
    }
    return n;
}

double PowerSystemModel::power_balance(const StatePartition& s) const {
    const int n_bus = index_.size();
    Vec V(n_bus), th(n_bus);
    for (int b = 0; b < n_bus; ++b) {
        V(b) = s.y(y_v(b));
        th(b) = s.y(y_th(b));
    }
    Vec Pf, Qf;
    bus_power_flows(admittance(s), V, th, Pf, Qf);
    double gen = 0.0, load = p_static_.sum();
    for (int gi = 0; gi < static_cast<int>(gens_.size()); ++gi) {
        if (gens_[gi].bus_idx == slack_idx_) continue;
        gen += stator_of(s, gi).pe;
    }
    for (const auto& ll : loads_) {
        const auto lo = dev::recovery_load(ll.p, s.z_c(ll.zc_off), s.z_c(ll.zc_off + 1),
                                           V(ll.bus_idx), ll.p0, ll.q0);
        load += lo.p;
    }
    // slack generation is whatever the pinned bus supplies through the network
    double slack_load = p_static_(slack_idx_);
    for (const auto& ll : loads_)
        if (ll.bus_idx == slack_idx_)
            slack_load += dev::recovery_load(ll.p, s.z_c(ll.zc_off), s.z_c(ll.zc_off + 1),
                                             V(ll.bus_idx), ll.p0, ll.q0)
                              .p;
    const double slack_gen = Pf(slack_idx_) + slack_load;
    const double losses = Pf.sum();
    return gen + slack_gen - load - losses;
}

}  // namespace psim
