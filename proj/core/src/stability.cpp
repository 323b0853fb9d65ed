#include "psim/stability.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>

namespace psim {

EquilibriumPoint find_equilibrium(const DynamicModel& model, const StatePartition& guess,
                                  double tol, int max_iter) {
    const Dims d = model.dims();
    const int n = d.n_zc + d.n_x + d.n_y;
    EquilibriumPoint ep;
    ep.s = guess;

    Vec hc, f, g, R(n);
    JacobianBlocks J;
    Mat A(n, n);
    for (int it = 0; it <= max_iter; ++it) {
        model.eval_hc(ep.s, hc);
        model.eval_f(ep.s, f);
        model.eval_g(ep.s, g);
        R.segment(0, d.n_zc) = hc;
        R.segment(d.n_zc, d.n_x) = f;
        R.segment(d.n_zc + d.n_x, d.n_y) = g;
        if (!R.allFinite()) return ep;
        ep.residual = R.lpNorm<Eigen::Infinity>();
        ep.iterations = it;
        if (ep.residual <= tol) {
            ep.converged = true;
            return ep;
        }
        if (it == max_iter) return ep;

        model.eval_jacobians(ep.s, J);
        A.block(0, 0, d.n_zc, d.n_zc) = J.dhc_dzc;
        A.block(0, d.n_zc, d.n_zc, d.n_x) = J.dhc_dx;
        A.block(0, d.n_zc + d.n_x, d.n_zc, d.n_y) = J.dhc_dy;
        A.block(d.n_zc, 0, d.n_x, d.n_zc) = J.df_dzc;
        A.block(d.n_zc, d.n_zc, d.n_x, d.n_x) = J.df_dx;
        A.block(d.n_zc, d.n_zc + d.n_x, d.n_x, d.n_y) = J.df_dy;
        A.block(d.n_zc + d.n_x, 0, d.n_y, d.n_zc) = J.dg_dzc;
        A.block(d.n_zc + d.n_x, d.n_zc, d.n_y, d.n_x) = J.dg_dx;
        A.block(d.n_zc + d.n_x, d.n_zc + d.n_x, d.n_y, d.n_y) = J.dg_dy;

        const Vec du = A.fullPivLu().solve(-R);
        if (!du.allFinite()) return ep;
        ep.s.z_c += du.segment(0, d.n_zc);
        ep.s.x += du.segment(d.n_zc, d.n_x);
        ep.s.y += du.segment(d.n_zc + d.n_x, d.n_y);
    }
    return ep;
}

GammaClassification classify_gamma_s(const DynamicModel& model, const StatePartition& s,
                                     double residual_tol) {
    const Dims d = model.dims();
    GammaClassification cl;

    Vec f, g;
    model.eval_f(s, f);
    model.eval_g(s, g);
    const double fn = d.n_x > 0 ? f.lpNorm<Eigen::Infinity>() : 0.0;
    const double gn = d.n_y > 0 ? g.lpNorm<Eigen::Infinity>() : 0.0;
    cl.on_manifold = std::max(fn, gn) <= residual_tol;

    JacobianBlocks J;
    model.eval_jacobians(s, J);
    const Eigen::FullPivLU<Mat> lu(J.dg_dy);
    cl.dg_dy_nonsingular = d.n_y == 0 || lu.isInvertible();
    if (!cl.dg_dy_nonsingular || d.n_x == 0) return cl;

    const Mat reduced = J.df_dx - J.df_dy * lu.solve(J.dg_dx);
    const Eigen::EigenSolver<Mat> es(reduced);
    cl.eigenvalues.resize(d.n_x);
    double max_re = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < d.n_x; ++i) {
        cl.eigenvalues[i] = es.eigenvalues()(i);
        max_re = std::max(max_re, es.eigenvalues()(i).real());
    }
    cl.max_real_part = max_re;
    cl.reduced_hurwitz = max_re < 0.0;
    cl.in_gamma_s = cl.on_manifold && cl.dg_dy_nonsingular && cl.reduced_hurwitz;
    return cl;
}

DampingReport assess_damping(const std::vector<double>& signal) {
    DampingReport rep;
    const size_t n = signal.size();
    if (n < 5) return rep;

    // Three-point smoothing knocks down solver-level jitter before the
    // extrema scan.
    std::vector<double> sm(n);
    sm[0] = signal[0];
    sm[n - 1] = signal[n - 1];
    for (size_t i = 1; i + 1 < n; ++i)
        sm[i] = (signal[i - 1] + signal[i] + signal[i + 1]) / 3.0;

    double mean = 0.0;
    for (double v : sm) mean += v;
    mean /= static_cast<double>(n);

    double span = 0.0;
    for (double v : sm) span = std::max(span, std::abs(v - mean));
    const double amp_floor = 1e-12 + 1e-9 * std::max(1.0, std::abs(mean));
    if (span <= amp_floor) {
        rep.verdict = DampingVerdict::damped;  // flat signal
        return rep;
    }

    // Successive extremum-to-extremum swings; measuring peak-to-peak keeps
    // the decay test immune to a nonzero or slowly drifting signal mean.
    std::vector<double> vals;
    for (size_t i = 1; i + 1 < n; ++i) {
        const bool peak = sm[i] > sm[i - 1] && sm[i] >= sm[i + 1];
        const bool trough = sm[i] < sm[i - 1] && sm[i] <= sm[i + 1];
        if (peak || trough) vals.push_back(sm[i]);
    }
    std::vector<double> mags;
    for (size_t i = 1; i < vals.size(); ++i) {
        const double swing = std::abs(vals[i] - vals[i - 1]);
        if (swing > amp_floor) mags.push_back(swing);
    }
    rep.extrema_count = static_cast<int>(vals.size());

    if (vals.size() < 3 || mags.size() < 2) {
        // Check monotonicity: a monotone transient has no oscillation to damp.
        bool nondec = true, noninc = true;
        for (size_t i = 1; i < n; ++i) {
            if (sm[i] < sm[i - 1] - amp_floor) nondec = false;
            if (sm[i] > sm[i - 1] + amp_floor) noninc = false;
        }
        if (nondec || noninc) rep.verdict = DampingVerdict::damped;
        return rep;
    }

    rep.first_amplitude = mags.front();
    rep.last_amplitude = mags.back();

    // Damped iff every successive extremum shrinks by at least 0.1%
    // relative; an equal-magnitude pair (limit cycle) breaks the decay.
    bool decaying = true;
    for (size_t i = 1; i < mags.size(); ++i) {
        if (mags[i] > mags[i - 1] * (1.0 - 1e-3)) {
            decaying = false;
            break;
        }
    }
    rep.verdict = decaying ? DampingVerdict::damped : DampingVerdict::undamped;
    return rep;
}

}  // namespace psim
