#pragma once

#include <vector>

#include "psim/model.hpp"

namespace psim {

struct EquilibriumPoint {
    StatePartition s;
    bool converged = false;
    double residual = 0.0;  // inf-norm over (h_c, f, g)
    int iterations = 0;
};

/// Newton on the stacked (h_c, f, g) over (z_c, x, y) with z_d frozen.
/// An exact equilibrium is accepted at iteration zero.
EquilibriumPoint find_equilibrium(const DynamicModel& model, const StatePartition& guess,
                                  double tol = 1e-9, int max_iter = 50);

struct GammaClassification {
    bool on_manifold = false;      // (f, g) residual within tolerance
    bool dg_dy_nonsingular = false;
    bool reduced_hurwitz = false;  // D_x f - D_y f (D_y g)^-1 D_x g has all Re < 0
    bool in_gamma_s = false;       // both of the above
    double max_real_part = 0.0;    // of the reduced Jacobian spectrum
    std::vector<std::complex<double>> eigenvalues;
};

/// Classifies a point of the constraint manifold against the stable
/// sub-manifold: the algebraic block must be invertible and the reduced
/// fast Jacobian Hurwitz.
GammaClassification classify_gamma_s(const DynamicModel& model, const StatePartition& s,
                                     double residual_tol = 1e-6);

enum class DampingVerdict { damped, undamped, inconclusive };

struct DampingReport {
    DampingVerdict verdict = DampingVerdict::inconclusive;
    int extrema_count = 0;
    double first_amplitude = 0.0;
    double last_amplitude = 0.0;
};

/// Oscillation-damping assessment of a sampled signal: the signal is
/// smoothed, its extrema magnitudes measured about the window mean, and
/// judged damped when successive peak magnitudes decay. Equal-magnitude
/// peaks (a limit cycle) count as undamped; a monotone or flat signal is
/// damped; fewer than three extrema is inconclusive.
DampingReport assess_damping(const std::vector<double>& signal);

}  // namespace psim
