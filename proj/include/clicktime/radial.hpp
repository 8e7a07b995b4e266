#pragma once

#include <complex>
#include <string>
#include <vector>

// Radial Schrodinger solver for short-range central potentials:
// u'' = [2m (V(r) - E) + l(l+1)/r^2] u, Numerov integration, phase-shift
// extraction against Riccati-Bessel pairs, and the on-shell scattering
// matrix.
//
// Two phase conventions are carried side by side. delta_std is the
// standard one (regular solution ~ sin(kr - l pi/2 + delta_std)).
// delta_paper = pi + 2 delta_std absorbs the extra factor acquired when
// the asymptotic wave is written as e^{-ikr} + e^{ikr + i delta}; only its
// energy derivative enters downstream formulas, so the constant offset per
// channel is immaterial.

namespace clicktime {

struct Potential {
    enum class Kind { free, hard_sphere, square_barrier, exponential, tabulated };

    Kind kind = Kind::free;
    double radius = 0;     // hard sphere
    double height = 0;     // square barrier V0
    double width = 0;      // square barrier r0
    double strength = 0;   // exponential V0
    double range = 0;      // exponential a0
    std::vector<double> r_samples, v_samples;  // tabulated

    int ell = 0;
    double mass = 1.0;

    // V(r); the hard-sphere core is a boundary condition, not a value here.
    double value(double r) const;
    // V on an integration grid of step dr: jump discontinuities landing on a
    // node evaluate to the mean of their one-sided limits.
    double grid_value(double r, double dr) const;
    double core_radius() const { return kind == Kind::hard_sphere ? radius : 0.0; }
    std::string kind_name() const;
};

Potential free_potential(int ell = 0, double mass = 1.0);
Potential hard_sphere(double radius, int ell = 0, double mass = 1.0);
Potential square_barrier(double height, double width, int ell = 0, double mass = 1.0);
Potential exponential_potential(double strength, double range, int ell = 0,
                                double mass = 1.0);
Potential tabulated_potential(std::vector<double> r, std::vector<double> v,
                              int ell = 0, double mass = 1.0);

// Regular solution on the uniform radius grid r_i = i * dr, normalized so
// the asymptotic amplitude is 1. u vanishes identically up to i_start
// (the origin, or the hard-sphere wall).
struct RadialSolution {
    double dr = 0;
    double k = 0;
    int i_start = 0;
    std::vector<double> u;  // u[i] at r = i * dr

    double r(int i) const { return i * dr; }
    int size() const { return static_cast<int>(u.size()); }
};

RadialSolution solve_radial(const Potential& p, double k, double r_max, double dr);

// Free-equation coefficients (alpha, beta) of u ~ alpha S_l(kr) + beta C_l(kr)
// fitted at two adjacent grid points starting at r_from.
struct AsymptoticFit {
    double alpha = 0;
    double beta = 0;
    double r_used = 0;
    double amplitude() const;
};

AsymptoticFit fit_asymptotic(const RadialSolution& sol, int ell, double r_from);

// Relative residual of the fitted free solution over [r_from, r_max];
// small values certify the solution is sinusoidal with constant amplitude
// beyond r_from.
double asymptotic_residual(const RadialSolution& sol, int ell, double r_from);

// Standard phase shift on the principal branch (-pi/2, pi/2], from a
// two-point Riccati-Bessel match at r_match and r_match + dr. Requires
// V(r_match) < 1e-12; retries up to ten grid steps outward if the match
// is degenerate.
double extract_phase_shift(const RadialSolution& sol, const Potential& p,
                           double r_match);

struct RadialParams {
    double r_max = 40.0;
    double dr = 1e-3;
    double r_match = 35.0;
};

struct PhaseShiftTable {
    std::vector<double> k;
    std::vector<double> delta_std;    // continuous branch
    std::vector<double> delta_paper;  // pi + 2 delta_std
    std::vector<double> dDelta_dE;    // derivative of delta_paper in energy
    double mass = 1.0;

    int size() const { return static_cast<int>(k.size()); }
    double energy(int i) const { return 0.5 * k[i] * k[i] / mass; }
};

// Solves per momentum, unwraps the branch to continuity, and differentiates
// delta_paper in energy (central differences with one Richardson step on
// the wider stencil).
PhaseShiftTable build_phase_table(const Potential& p,
                                  const std::vector<double>& k_grid,
                                  const RadialParams& params = {});

// S(E) = e^{i delta_paper(k(E))} per table entry.
std::vector<std::complex<double>> on_shell_S(const PhaseShiftTable& table);

}  // namespace clicktime
