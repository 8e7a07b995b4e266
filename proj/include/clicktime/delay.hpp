#pragma once

#include "clicktime/povm.hpp"
#include "clicktime/radial.hpp"
#include "clicktime/shell.hpp"

#include <vector>

// End-to-end time-delay computations: wave-packet click densities for free
// vs interacting dynamics, density-shift read-out, and the on-shell delay
// formula t(E) = S^{-1}(-i d/dE)S + S^{-1}[d, S], whose scalar case is the
// Eisenbud-Wigner derivative of the scattering phase.

namespace clicktime {

struct WavePacket {
    double k0 = 0;       // central momentum
    double sigma_k = 0;  // momentum spread; gaussian profile, cut at 5 sigma
};

// sigma_k / k0 <= 0.05; the linearized-delay tolerances assume this.
bool packet_is_narrow(const WavePacket& p);

// The packet as a normalized section over the energy grid. The 5-sigma
// support must sit strictly inside the grid so the section is
// boundary-vanishing.
Section packet_section(const WavePacket& p, const EnergyGrid& grid);

struct PacketDensity {
    std::vector<double> p;       // renormalized to unit mass on the grid
    double captured_mass = 0;    // trapezoidal mass before renormalization
};

// Factorized density p(t) = |G(t)|^2 / 2pi with
// G(t) = sum_k w phi(k) e^{i(kR + delta_paper(k))} e^{-itE}. Requires the
// zero-thickness detector (the finite-thickness kernel does not factorize).
PacketDensity packet_click_density(const WavePacket& packet, const ShellSpec& shell,
                                   const PhaseShiftTable& table,
                                   const EnergyGrid& grid,
                                   const std::vector<double>& t_grid);

struct DelayReport {
    double t_mean_free = 0;
    double t_mean_int = 0;
    double t_peak_free = 0;
    double t_peak_int = 0;
    double shift_mean = 0;
    double shift_peak = 0;
    double wigner_delay_at_k0 = 0;
    double l1_overlap_residual = 0;
    double sigma_t_free = 0;   // time spread of the free density
    bool peak_reliable = true; // false when a density is multimodal
};

// Compares two normalized densities on a common time grid. shift_peak uses
// quadratic interpolation around the maxima; the L1 residual compares
// p_int displaced by the Wigner delay against p_free.
DelayReport measure_shift(const std::vector<double>& p_free,
                          const std::vector<double>& p_int,
                          const std::vector<double>& t_grid, double wigner_delay);

// Unitary on-shell scattering matrix per grid point (1x1 in a nondegenerate
// channel, externally supplied fiber matrices otherwise).
struct OnShellS {
    EnergyGrid grid;
    std::vector<Eigen::MatrixXcd> values;
};

OnShellS scalar_on_shell(const PhaseShiftTable& table, const EnergyGrid& grid);
OnShellS matrix_on_shell(const EnergyGrid& grid,
                         std::vector<Eigen::MatrixXcd> values);

// t(E_i) = S_i^dag (-i dS/dE)_i + S_i^dag (d_i S_i - S_i d_i), hermitized.
// The commutator term vanishes identically for scalar d.
std::vector<Eigen::MatrixXcd> eisenbud_wigner(const OnShellS& s, const Connection& d);

// Scalar (1x1) delay values as a real list.
std::vector<double> scalar_delay(const std::vector<Eigen::MatrixXcd>& delay);

// <S phi, T (S phi)> - <phi, T phi> with T the time operator of c. Equal to
// the expectation of S^{-1}[T, S] for unitary S, and to the |phi|^2-weighted
// average of eisenbud_wigner for slowly varying phases.
double operator_delay(const Section& packet, const OnShellS& s,
                      const NormalizedKernel& c);

// |phi|^2-weighted average of a scalar delay profile.
double packet_average(const std::vector<double>& profile, const Section& packet);

// dDelta_dE linearly interpolated at the packet's central energy.
double wigner_delay_at(const PhaseShiftTable& table, double k0);

}  // namespace clicktime
