#pragma once

#include <cmath>
#include <random>
#include <string>

#include "psim/model.hpp"
#include "psim/powerflow.hpp"
#include "psim/scenario_io.hpp"

namespace testers {

inline std::string cases_dir() {
#ifdef PSIM_CASES_DIR
    return PSIM_CASES_DIR;
#else
    return "cases";
#endif
}

inline psim::Case load_fixture(const std::string& name) {
    return psim::load_case(cases_dir() + "/" + name + ".json");
}

inline psim::EventSchedule load_sched(const std::string& name) {
    return psim::load_schedule(cases_dir() + "/" + name + ".json");
}

/// Linear toy: h_c = c_z * z, f = a_z z + a_x x + a_y y, g = b_z z + b_x x + b_y y.
/// Everything scalar; covers the manifold-solve, reduced-Jacobian and
/// singularity examples with hand-checkable numbers.
class ToyLinModel : public psim::DynamicModel {
  public:
    double a_z = 1.0, a_x = -1.0, a_y = 0.0;
    double b_z = 0.0, b_x = -1.0, b_y = 1.0;
    double c_z = 0.0;

    psim::Dims dims() const override { return {1, 0, 1, 1}; }
    void eval_hc(const psim::StatePartition& s, psim::Vec& out) const override {
        out.resize(1);
        out(0) = c_z * s.z_c(0);
    }
    void eval_f(const psim::StatePartition& s, psim::Vec& out) const override {
        out.resize(1);
        out(0) = a_z * s.z_c(0) + a_x * s.x(0) + a_y * s.y(0);
    }
    void eval_g(const psim::StatePartition& s, psim::Vec& out) const override {
        out.resize(1);
        out(0) = b_z * s.z_c(0) + b_x * s.x(0) + b_y * s.y(0);
    }
    void eval_jacobians(const psim::StatePartition&, psim::JacobianBlocks& J) const override {
        J.resize(dims());
        J.dhc_dzc(0, 0) = c_z;
        J.df_dzc(0, 0) = a_z;
        J.df_dx(0, 0) = a_x;
        J.df_dy(0, 0) = a_y;
        J.dg_dzc(0, 0) = b_z;
        J.dg_dx(0, 0) = b_x;
        J.dg_dy(0, 0) = b_y;
    }
    psim::StatePartition state(double z, double x, double y) const {
        psim::StatePartition s;
        s.z_c.resize(1);
        s.z_d.resize(0);
        s.x.resize(1);
        s.y.resize(1);
        s.z_c(0) = z;
        s.x(0) = x;
        s.y(0) = y;
        return s;
    }
};

/// Two-branch manifold x^2 = z (written f = z - x^2) with g = y - x and a
/// bounded study region. A guess far outside the solution basin must make
/// the solver abort rather than silently land on the other branch.
class FoldModel : public psim::DynamicModel {
  public:
    double bound = 2.0;

    psim::Dims dims() const override { return {1, 0, 1, 1}; }
    void eval_hc(const psim::StatePartition&, psim::Vec& out) const override {
        out.setZero(1);
    }
    void eval_f(const psim::StatePartition& s, psim::Vec& out) const override {
        out.resize(1);
        out(0) = s.z_c(0) - s.x(0) * s.x(0);
    }
    void eval_g(const psim::StatePartition& s, psim::Vec& out) const override {
        out.resize(1);
        out(0) = s.y(0) - s.x(0);
    }
    void eval_jacobians(const psim::StatePartition& s, psim::JacobianBlocks& J) const override {
        J.resize(dims());
        J.df_dzc(0, 0) = 1.0;
        J.df_dx(0, 0) = -2.0 * s.x(0);
        J.dg_dx(0, 0) = -1.0;
        J.dg_dy(0, 0) = 1.0;
    }
    bool within_bounds(const psim::StatePartition& s) const override {
        return std::abs(s.x(0)) <= bound && std::abs(s.y(0)) <= bound;
    }
    psim::StatePartition state(double z, double x, double y) const {
        psim::StatePartition s;
        s.z_c.resize(1);
        s.z_d.resize(0);
        s.x.resize(1);
        s.y.resize(1);
        s.z_c(0) = z;
        s.x(0) = x;
        s.y(0) = y;
        return s;
    }
};

/// Pure fast scalar: x' = -x, no slow or algebraic part. Exercises the
/// trapezoidal step against the closed form.
class ScalarDecayModel : public psim::DynamicModel {
  public:
    psim::Dims dims() const override { return {0, 0, 1, 0}; }
    void eval_hc(const psim::StatePartition&, psim::Vec& out) const override {
        out.resize(0);
    }
    void eval_f(const psim::StatePartition& s, psim::Vec& out) const override {
        out.resize(1);
        out(0) = -s.x(0);
    }
    void eval_g(const psim::StatePartition&, psim::Vec& out) const override {
        out.resize(0);
    }
    void eval_jacobians(const psim::StatePartition&, psim::JacobianBlocks& J) const override {
        J.resize(dims());
        J.df_dx(0, 0) = -1.0;
    }
    psim::StatePartition state(double x) const {
        psim::StatePartition s;
        s.z_c.resize(0);
        s.z_d.resize(0);
        s.x.resize(1);
        s.y.resize(0);
        s.x(0) = x;
        return s;
    }
};

/// Stiff two-time-scale pair: z' = -z (slow), x' = (-x + z) / eps (fast).
/// Linear, so the exact trajectory is available in closed form.
class StiffPairModel : public psim::DynamicModel {
  public:
    double eps = 0.05;

    psim::Dims dims() const override { return {1, 0, 1, 0}; }
    void eval_hc(const psim::StatePartition& s, psim::Vec& out) const override {
        out.resize(1);
        out(0) = -s.z_c(0);
    }
    void eval_f(const psim::StatePartition& s, psim::Vec& out) const override {
        out.resize(1);
        out(0) = (-s.x(0) + s.z_c(0)) / eps;
    }
    void eval_g(const psim::StatePartition&, psim::Vec& out) const override {
        out.resize(0);
    }
    void eval_jacobians(const psim::StatePartition&, psim::JacobianBlocks& J) const override {
        J.resize(dims());
        J.dhc_dzc(0, 0) = -1.0;
        J.df_dzc(0, 0) = 1.0 / eps;
        J.df_dx(0, 0) = -1.0 / eps;
    }
    psim::StatePartition state(double z, double x) const {
        psim::StatePartition s;
        s.z_c.resize(1);
        s.z_d.resize(0);
        s.x.resize(1);
        s.y.resize(0);
        s.z_c(0) = z;
        s.x(0) = x;
        return s;
    }
    // exact solution for z(0)=z0, x(0)=x0
    void exact(double z0, double x0, double t, double& z, double& x) const {
        const double a = z0 / (1.0 - eps);
        z = z0 * std::exp(-t);
        x = (x0 - a) * std::exp(-t / eps) + a * std::exp(-t);
    }
};

/// Single machine against the slack bus, no slow devices: the smallest
/// nontrivial power-system fixture with an analytic equilibrium check.
inline psim::Case make_smib(bool with_avr = false) {
    psim::Case c;
    c.name = "smib";
    psim::Bus b1;
    b1.id = 1;
    b1.kind = psim::BusKind::slack;
    b1.v_set = 1.0;
    psim::Bus b2;
    b2.id = 2;
    b2.kind = psim::BusKind::generator;
    b2.v_set = 1.02;
    b2.p_load = 0.1;
    b2.q_load = 0.05;
    c.buses = {b1, b2};
    psim::Branch br;
    br.id = "1-2";
    br.from = 1;
    br.to = 2;
    br.r = 0.02;
    br.x = 0.4;
    br.b = 0.04;
    c.branches = {br};
    psim::GeneratorParams g;
    g.bus = 2;
    g.h = 4.0;
    g.d = 2.0;
    g.p_set = 0.5;
    g.td0p = 1.0;  // fast field decay so the swing pair dominates
    g.tq0p = 0.5;
    if (with_avr) {
        psim::AvrParams a;
        a.ka = 50.0;
        a.te = 0.4;
        g.avr = a;
    }
    c.generators = {g};
    return c;
}

/// Worst relative mismatch between the analytic jacobian blocks and a
/// central-difference probe of (h_c, f, g) at a state.
inline double jacobian_fd_error(const psim::DynamicModel& m, const psim::StatePartition& s,
                                double h = 1e-6) {
    psim::JacobianBlocks J;
    m.eval_jacobians(s, J);
    const psim::Dims d = m.dims();
    double worst = 0.0;
    auto probe = [&](auto get_vec, const psim::Mat& dzc, const psim::Mat& dx,
                     const psim::Mat& dy) {
        psim::Vec p, q;
        for (int j = 0; j < d.n_zc + d.n_x + d.n_y; ++j) {
            psim::StatePartition sp = s, sm = s;
            const psim::Mat* blk;
            int col;
            if (j < d.n_zc) {
                col = j;
                sp.z_c(col) += h;
                sm.z_c(col) -= h;
                blk = &dzc;
            } else if (j < d.n_zc + d.n_x) {
                col = j - d.n_zc;
                sp.x(col) += h;
                sm.x(col) -= h;
                blk = &dx;
            } else {
                col = j - d.n_zc - d.n_x;
                sp.y(col) += h;
                sm.y(col) -= h;
                blk = &dy;
            }
            get_vec(sp, p);
            get_vec(sm, q);
            for (int i = 0; i < p.size(); ++i) {
                const double fd = (p(i) - q(i)) / (2 * h);
                const double an = (*blk)(i, col);
                worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
            }
        }
    };
    probe([&](const psim::StatePartition& x, psim::Vec& o) { m.eval_hc(x, o); }, J.dhc_dzc,
          J.dhc_dx, J.dhc_dy);
    probe([&](const psim::StatePartition& x, psim::Vec& o) { m.eval_f(x, o); }, J.df_dzc,
          J.df_dx, J.df_dy);
    probe([&](const psim::StatePartition& x, psim::Vec& o) { m.eval_g(x, o); }, J.dg_dzc,
          J.dg_dx, J.dg_dy);
    return worst;
}

/// Equilibrium state plus a bounded uniform perturbation of the continuous
/// variables, for randomized jacobian and equilibrium probing.
inline psim::StatePartition perturb_state(const psim::StatePartition& base, std::mt19937& rng,
                                          double mag) {
    std::uniform_real_distribution<double> d(-mag, mag);
    psim::StatePartition s = base;
    for (int i = 0; i < s.z_c.size(); ++i) s.z_c(i) += d(rng);
    for (int i = 0; i < s.x.size(); ++i) s.x(i) += d(rng);
    for (int i = 0; i < s.y.size(); ++i) s.y(i) += d(rng);
    return s;
}

inline double inf_norm(const psim::Vec& v) {
    return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0;
}

/// Largest of the three residual norms at a state.
inline double equilibrium_residual(const psim::DynamicModel& m, const psim::StatePartition& s) {
    psim::Vec hc, f, g;
    m.eval_hc(s, hc);
    m.eval_f(s, f);
    m.eval_g(s, g);
    return std::max({inf_norm(hc), inf_norm(f), inf_norm(g)});
}

}  // namespace testers
