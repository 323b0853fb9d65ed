#include "psim/powerflow.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace psim {

PowerFlowResult solve_power_flow(const Case& c, double tol, int max_iter) {
    const BusIndex index = BusIndex::build(c.buses);
    const int n = index.size();
    const CMat Y = build_admittance(c.buses, c.branches, index).Y;

    Vec p_spec = Vec::Zero(n), q_spec = Vec::Zero(n);
    std::vector<bool> is_pv(n, false), is_slack(n, false);
    int slack = -1;
    for (int b = 0; b < n; ++b) {
        p_spec(b) -= c.buses[b].p_load;
        q_spec(b) -= c.buses[b].q_load;
        if (c.buses[b].kind == BusKind::slack) {
            is_slack[b] = true;
            slack = b;
        } else if (c.buses[b].kind == BusKind::generator) {
            is_pv[b] = true;
        }
    }
    for (const auto& g : c.generators) p_spec(index.at(g.bus)) += g.p_set;

    PowerFlowResult res;
    res.V = Vec::Ones(n);
    res.theta = Vec::Zero(n);
    for (int b = 0; b < n; ++b)
        if (is_slack[b] || is_pv[b]) res.V(b) = c.buses[b].v_set;

    // unknown ordering: theta at non-slack, then V at PQ buses
    std::vector<int> th_u, v_u;
    for (int b = 0; b < n; ++b) {
        if (!is_slack[b]) th_u.push_back(b);
        if (!is_slack[b] && !is_pv[b]) v_u.push_back(b);
    }
    const int m = static_cast<int>(th_u.size() + v_u.size());

    Vec P, Q;
    Mat dP_dV, dP_dth, dQ_dV, dQ_dth;
    for (int it = 0; it < max_iter; ++it) {
        bus_power_flows(Y, res.V, res.theta, P, Q);
        Vec r(m);
        for (size_t i = 0; i < th_u.size(); ++i) r(i) = p_spec(th_u[i]) - P(th_u[i]);
        for (size_t i = 0; i < v_u.size(); ++i)
            r(th_u.size() + i) = q_spec(v_u[i]) - Q(v_u[i]);
        if (r.lpNorm<Eigen::Infinity>() < tol) {
            res.converged = true;
            res.iterations = it;
            break;
        }
        flow_jacobian(Y, res.V, res.theta, dP_dV, dP_dth, dQ_dV, dQ_dth);
        Mat J(m, m);
        for (size_t i = 0; i < th_u.size(); ++i) {
            for (size_t j = 0; j < th_u.size(); ++j) J(i, j) = dP_dth(th_u[i], th_u[j]);
            for (size_t j = 0; j < v_u.size(); ++j)
                J(i, th_u.size() + j) = dP_dV(th_u[i], v_u[j]);
        }
        for (size_t i = 0; i < v_u.size(); ++i) {
            for (size_t j = 0; j < th_u.size(); ++j)
                J(th_u.size() + i, j) = dQ_dth(v_u[i], th_u[j]);
            for (size_t j = 0; j < v_u.size(); ++j)
                J(th_u.size() + i, th_u.size() + j) = dQ_dV(v_u[i], v_u[j]);
        }
        const Vec du = J.partialPivLu().solve(r);
        if (!du.allFinite()) break;
        for (size_t i = 0; i < th_u.size(); ++i) res.theta(th_u[i]) += du(i);
        for (size_t i = 0; i < v_u.size(); ++i) res.V(v_u[i]) += du(th_u.size() + i);
    }

    // generator terminal powers from the solved flows
    bus_power_flows(Y, res.V, res.theta, P, Q);
    res.p_gen.setZero(static_cast<int>(c.generators.size()));
    res.q_gen.setZero(static_cast<int>(c.generators.size()));
    for (size_t gi = 0; gi < c.generators.size(); ++gi) {
        const int b = index.at(c.generators[gi].bus);
        res.p_gen(gi) = P(b) + c.buses[b].p_load;
        res.q_gen(gi) = Q(b) + c.buses[b].q_load;
    }
    (void)slack;
    return res;
}

SimState initialize_equilibrium(PowerSystemModel& model) {
    const Case& c = model.case_data();
    const PowerFlowResult pf = solve_power_flow(c);
    if (!pf.converged) throw std::runtime_error("power flow failed for case " + c.name);

    SimState st;
    st.t = 0.0;
    st.part = model.make_state();
    StatePartition& s = st.part;

    const auto& index = model.bus_index();
    for (int b = 0; b < index.size(); ++b) {
        s.y(model.y_v(b)) = pf.V(b);
        s.y(model.y_th(b)) = pf.theta(b);
    }

    for (size_t gi = 0; gi < model.gens().size(); ++gi) {
        auto& gl = model.gen_mutable(static_cast<int>(gi));
        const int b = gl.bus_idx;
        const double V = pf.V(b), th = pf.theta(b);
        const double Pg = pf.p_gen(gi), Qg = pf.q_gen(gi);
        const std::complex<double> vbar = std::polar(V, th);
        const std::complex<double> ibar = std::conj(std::complex<double>(Pg, Qg) / vbar);
        const std::complex<double> eq_phasor =
            vbar + std::complex<double>(0.0, gl.p.xq) * ibar;
        const double delta = std::arg(eq_phasor);
        const double imag = std::abs(ibar), phi = std::arg(ibar);
        const double id = imag * std::sin(delta - phi);
        const double iq = imag * std::cos(delta - phi);
        const double a = delta - th;
        const double vd = V * std::sin(a), vq = V * std::cos(a);
        const double eqp = vq + gl.p.xdp * id;
        const double edp = vd - gl.p.xqp * iq;
        const double efd = eqp + (gl.p.xd - gl.p.xdp) * id;

        const int xo = gl.x_off;
        s.x(xo) = delta;
        s.x(xo + 1) = 0.0;
        s.x(xo + 2) = eqp;
        s.x(xo + 3) = edp;
        if (gl.p.avr) {
            s.x(xo + 4) = V;
            s.x(xo + 5) = efd;
            s.x(xo + 6) = efd;
            gl.v_ref = V + efd / gl.p.avr->ka;
        } else {
            gl.efd_const = efd;
        }
        gl.p_ref = Pg;
        if (gl.gov_zc >= 0) {
            s.z_c(gl.gov_zc) = Pg;
            s.z_c(gl.gov_zc + 1) = Pg;
        }
        if (gl.oxl_zc >= 0) s.z_c(gl.oxl_zc) = 0.0;
    }

    for (size_t li = 0; li < model.loads().size(); ++li) {
        auto& ll = model.load_mutable(static_cast<int>(li));
        const double V = pf.V(ll.bus_idx);
        // consumed steady-state power must match the power-flow load
        ll.p0 = ll.p_nom / std::pow(V, ll.p.alpha_s);
        ll.q0 = ll.q_nom / std::pow(V, ll.p.beta_s);
        s.z_c(ll.zc_off) = ll.p.tp * ll.p0 * (std::pow(V, ll.p.alpha_s) - std::pow(V, ll.p.alpha_t));
        s.z_c(ll.zc_off + 1) =
            ll.p.tq * ll.q0 * (std::pow(V, ll.p.beta_s) - std::pow(V, ll.p.beta_t));
    }

    st.status = model.status_snapshot();
    return st;
}

}  // namespace psim
