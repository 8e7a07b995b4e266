#pragma once

#include "clicktime/povm.hpp"
#include "clicktime/radial.hpp"

#include <vector>

// Spherical-shell passage detector: the outgoing-component selector Q, the
// effect kernel it induces (numerically from radial solutions, and in
// closed form from the phase-shift table), and the shell connection.
//
// Frozen sign conventions, anchored on two physical requirements — a free
// particle clicks at the classical traversal time d(E) = m R / k > 0, and
// a repulsive potential shifts the click-time density by a negative delay:
//   Q u        = +(i/k) u' - u           (kills e^{-ikr}, maps e^{ikr} to -2 e^{ikr})
//   c(E,E')    = sinc(rho (k-k')/2) e^{-i (eta(k) - eta(k'))},
//                eta(k) = k R + delta_paper(k)
//   d(E)       = m R / k + d(delta_paper)/dE
// so the Eisenbud-Wigner delay comes out as d(delta_paper)/dE.

namespace clicktime {

struct ShellSpec {
    double radius = 0;     // R
    double thickness = 0;  // rho; 0 selects the closed-form limit
    double mass = 1.0;
};

ShellSpec make_shell(double radius, double thickness, double mass = 1.0);

// Q = +(i/k) d/dr - 1 acting on energy eigenfunctions, where (2mH)^{-1/2}
// reduces to 1/k. The sign is the calibrated convention above.
struct OutgoingSelector {
    int sign = +1;
};

// Central-difference derivative on the radial grid (one-sided at the ends).
std::vector<Complex> apply_outgoing_selector(const OutgoingSelector& q,
                                             const RadialSolution& sol);

// a(E_i,E_j) = m / sqrt(k_i k_j) * integral over [R, R+rho] of
// conj(Q u_{k_i}) (Q u_{k_j}) dr, trapezoidal on the shared radial grid.
// Gram form, hence hermitian positive semidefinite. The solutions are the
// real regular waves from solve_radial (standing-wave basis); relative to
// the closed form below this shifts the phase reference by delta_std per
// momentum and centers the shell phase at R + rho/2.
EffectKernel numerical_effect_kernel(const OutgoingSelector& q,
                                     const ShellSpec& shell,
                                     const EnergyGrid& grid,
                                     const std::vector<RadialSolution>& solutions);

// Closed-form normalized kernel in the asymptotic (rho -> 0 safe) limit.
NormalizedKernel closed_form_c(const ShellSpec& shell, const PhaseShiftTable& table,
                               const EnergyGrid& grid);

// d(E) = m R / k(E) + dDelta_dE(E); agrees with connection(closed_form_c)
// up to the finite-difference truncation of the latter.
Connection shell_connection(const ShellSpec& shell, const PhaseShiftTable& table,
                            const EnergyGrid& grid);

double sinc(double x);  // sin(x)/x with a series branch near 0

}  // namespace clicktime
