#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

// Discretized energy representation: uniform grid over an absolutely
// continuous spectrum, sections of a trivial fiber bundle over it, and
// integral-kernel operators acting by weighted quadrature.
//
// Units: hbar = 1 throughout. Momentum map k = sqrt(2 m E), so energies
// must be strictly positive. Inner products are antilinear in the FIRST
// argument.

namespace clicktime {

using Complex = std::complex<double>;

struct EnergyGrid {
    double e_min = 0;
    double e_max = 0;
    int n_points = 0;
    double mass = 1.0;
    int fiber_dim = 1;
    double h = 0;  // grid spacing
    double w = 0;  // quadrature weight (uniform, = h)

    double energy(int i) const { return e_min + i * h; }
    double momentum(int i) const { return std::sqrt(2.0 * mass * energy(i)); }
    std::vector<double> momenta() const;

    // Largest alias-free time horizon; the discrete delta is exact there.
    double t_star() const;

    int dim() const { return n_points * fiber_dim; }
    bool same_grid(const EnergyGrid& o) const;
};

// Validates e_min > 0 (momentum map), e_max > e_min, n_points >= 2.
EnergyGrid make_grid(double e_min, double e_max, int n_points,
                     double mass = 1.0, int fiber_dim = 1);

// Complex section over the grid, values flattened per grid point
// (fiber components contiguous).
struct Section {
    EnergyGrid grid;
    Eigen::VectorXcd values;

    double norm() const;
};

Section make_section(const EnergyGrid& grid, Eigen::VectorXcd values);
Section zero_section(const EnergyGrid& grid);

// <a,b> = sum_i w * conj(a_i) . b_i  (antilinear in the first slot)
Complex inner_product(const Section& a, const Section& b);

// Integral kernel K(E_i, E_j), fiber-matrix-valued blocks when
// fiber_dim > 1. Acts on sections as (K phi)_i = sum_j w K_ij phi_j.
struct KernelOperator {
    EnergyGrid grid;
    Eigen::MatrixXcd entries;

    Eigen::Block<Eigen::MatrixXcd> block(int i, int j);
    Eigen::Block<const Eigen::MatrixXcd> block(int i, int j) const;
};

KernelOperator make_kernel(const EnergyGrid& grid, Eigen::MatrixXcd entries);
KernelOperator zero_kernel(const EnergyGrid& grid);
KernelOperator identity_kernel(const EnergyGrid& grid);  // delta_ij / w

Section apply(const KernelOperator& k, const Section& phi);

// max_ij |K_ij - conj(K_ji)|
double hermiticity_defect(const KernelOperator& k);

// Smallest eigenvalue of the weighted matrix w*K (the operator the kernel
// represents). Rejects kernels with hermiticity defect beyond 1e-10;
// the eigensolver runs on the hermitized matrix.
double min_eigenvalue(const KernelOperator& k);

// Both spectral edges of w*K, same hermiticity contract.
std::pair<double, double> eigenvalue_bounds(const KernelOperator& k);

// sin(pi x), cos(pi x) with exact values at (half-)integers.
double sin_pi(double x);
double cos_pi(double x);

// Integral of exp(i t dn h) dt over [t_a, t_b] for integer frequency
// separation dn on a grid of spacing h. Phases are reduced against the
// Nyquist horizon t_star = pi/h so that the full window [-t_star, t_star]
// yields the discrete delta 2*pi/h * delta_{dn,0} exactly. The removable
// singularity at dn*h -> 0 is evaluated by series.
Complex window_integral(int dn, double t_a, double t_b, const EnergyGrid& grid);

}  // namespace clicktime
