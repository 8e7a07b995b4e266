#pragma once

#include "clicktime/energy_grid.hpp"

#include <cstdint>
#include <vector>

// Occurrence-time POVM of a detector effect on the discretized energy
// representation. From an effect kernel a(E,E') this module builds the
// unit-diagonal kernel c, the interval measures P(I), the truncated
// duration operators B(T) and their resolvent net, the covariant time
// operator T = -i d/dE + d(E), click-time densities and their moments.

namespace clicktime {

// Positive effect in the energy representation: hermitian, positive
// semidefinite (weighted min eigenvalue >= -1e-10) with strictly positive
// diagonal. Construct through make_effect_kernel, which enforces all of it.
struct EffectKernel {
    KernelOperator kernel;
};

EffectKernel make_effect_kernel(KernelOperator kernel);

// c(E,E') = a(E,E)^{-1/2} a(E,E') a(E',E')^{-1/2}; diagonal is the fiber
// identity exactly, |c| <= 1 entrywise in the scalar case.
struct NormalizedKernel {
    KernelOperator kernel;
};

struct TimeInterval {
    double t_a = 0;
    double t_b = 0;
    double length() const { return t_b - t_a; }
};

// Kernel of the measure element P(I): hermitian, spectrum in [0, 1] up to
// 1e-10.
struct IntervalMeasureKernel {
    TimeInterval interval;
    KernelOperator kernel;
};

// Truncation window [-T, T] for duration integrals; T may not exceed the
// grid's alias-free horizon t_star.
struct TimeWindow {
    double half_width = 0;
};

// Hermitian field d(E) making T = -i d/dE + d(E) a covariant derivative.
// One fiber matrix per grid point (1x1 and real in the scalar case);
// max_asymmetry records how far the raw finite-difference result was from
// hermitian before symmetrization.
struct Connection {
    EnergyGrid grid;
    std::vector<Eigen::MatrixXcd> values;
    double max_asymmetry = 0;

    double scalar_at(int i) const;  // fiber_dim == 1 only
};

// Resolvent net (B(T)+1)^{-1} evaluated along increasing windows.
// Matrices are in the weighted-operator representation (identity = unit
// matrix); the limit candidate C is taken at the largest window and
// B = C^{-1} - 1.
struct NetLimitReport {
    std::vector<double> half_widths;
    double resolvent_min_eig = 0;         // over all windows
    double resolvent_max_eig = 0;         // over all windows, expected <= 1
    double worst_monotonicity = 0;        // min eig of R_prev - R_next, expected >= -1e-10
    bool monotone = false;                // worst_monotonicity >= -1e-10
    Eigen::MatrixXcd limit_resolvent;     // C
    Eigen::MatrixXcd duration_operator;   // B = C^{-1} - 1
};

NormalizedKernel normalize_kernel(const EffectKernel& a);

// Kernel of P(I): (1/2pi) c(E_i,E_j) * window_integral(i-j, I).
IntervalMeasureKernel interval_kernel(const NormalizedKernel& c, TimeInterval I);

// Max entrywise deviation between the time-conjugated kernel
// e^{itE} P(I) e^{-itE'} and the kernel of P(I+t). Analytically zero.
// Both I and I+t must stay inside the alias-free horizon.
double shift_interval_covariance_check(const NormalizedKernel& c, TimeInterval I,
                                       double t);

// Kernel of B(T) = integral over [-T,T] of the Heisenberg-evolved effect:
// a(E_i,E_j) * window_integral(i-j, [-T,T]).
KernelOperator truncated_duration_operator(const EffectKernel& a, TimeWindow T);

NetLimitReport net_limit_check(const EffectKernel& a,
                               const std::vector<double>& half_widths);

// P(I) = B^{-1/2} B(I) B^{-1/2} with B from the resolvent-net limit at
// t_star. Must agree entrywise with interval_kernel(normalize_kernel(a), I)
// to 1e-10; the two routes share no code beyond the window integral.
IntervalMeasureKernel matrix_povm(const EffectKernel& a, TimeInterval I);

// <Phi, B Phi> at the full horizon: 2pi sum_i w Phi_i^* a(E_i,E_i) Phi_i.
double total_duration_expectation(const EffectKernel& a, const Section& phi);

// d(E_i) = -i d/dE' c(E_i,E')|_{E'=E_i} by central differences in the
// second slot (one-sided at the boundary), hermitized per point.
Connection connection(const NormalizedKernel& c);

// (T phi)(E_i) = -i (phi_{i+1} - phi_{i-1})/(2h) + d(E_i) phi_i with ghost
// zeros outside the grid. Rejects sections whose boundary values exceed
// 1e-8 of the sup norm.
Section apply_time_operator(const NormalizedKernel& c, const Section& phi);

// p(t) = (1/2pi) sum_ij w^2 Phi_i^* c_ij e^{it(E_i-E_j)} Phi_j at each
// requested time; times must lie inside the alias-free window.
std::vector<double> click_density(const NormalizedKernel& c, const Section& phi,
                                  const std::vector<double>& t_grid);

// First moment of the click density over the alias-free window, by
// trapezoidal quadrature refined until halving the step moves the result
// by less than 1e-4 relative. Input must be normalized and
// boundary-vanishing.
double first_moment(const NormalizedKernel& c, const Section& phi);

// Transition time between two effects: pointwise difference of their
// connections.
Connection transition_time(const Connection& d1, const Connection& d2);

// Largest pointwise operator norm over the grid (sup norm of the field).
double max_norm(const Connection& d);

// Synthetic smooth positive effect (low-rank sum of gaussian-envelope
// profiles with bounded phase velocities), deterministic in the seed.
// Used by the self-check command and the test suites.
EffectKernel random_smooth_effect(const EnergyGrid& grid, std::uint64_t seed,
                                  int rank = 4);

}  // namespace clicktime
