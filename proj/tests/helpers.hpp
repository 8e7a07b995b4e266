#pragma once

#include "clicktime/delay.hpp"
#include "clicktime/povm.hpp"
#include "clicktime/radial.hpp"
#include "clicktime/shell.hpp"

#include <cmath>
#include <random>

// Shared fixtures and independent oracles for the test suites. Oracles here
// are deliberately written from the closed-form physics, not by calling the
// code paths they check.

namespace testutil {

using namespace clicktime;

inline EnergyGrid standard_grid(int n = 401, double e_min = 0.5, double e_max = 4.5,
                                double mass = 1.0, int fiber = 1) {
    return make_grid(e_min, e_max, n, mass, fiber);
}

// Smooth normalized section: gaussian envelope centered in the grid, mild
// random amplitude ripple, and a linear phase e^{-i t0 E} so its click
// times sit near t0. Vanishes at the boundaries to far below 1e-8.
inline Section random_section(const EnergyGrid& g, std::uint64_t seed,
                              double t0_min = 5.0, double t0_max = 40.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double range = g.e_max - g.e_min;
    const double center = g.e_min + range * (0.45 + 0.1 * uni(rng));
    const double width = range / (14.0 + 4.0 * uni(rng));
    const double t0 = t0_min + (t0_max - t0_min) * uni(rng);
    const double ripple_omega = 4.0 * M_PI / range * uni(rng);
    const double ripple_phase = 2.0 * M_PI * uni(rng);
    Eigen::VectorXcd v(g.dim());
    for (int i = 0; i < g.n_points; ++i) {
        const double e = g.energy(i);
        const double x = (e - center) / width;
        const double env = std::exp(-0.5 * x * x) *
                           (1.0 + 0.2 * std::cos(ripple_omega * e + ripple_phase));
        for (int c = 0; c < g.fiber_dim; ++c)
            v[i * g.fiber_dim + c] = env * std::polar(1.0, -t0 * e);
    }
    v /= std::sqrt(g.w) * v.norm();
    return make_section(g, std::move(v));
}

// Pure-phase normalized kernel c(E,E') = e^{-i tau (E - E')}; its click
// densities are those of the identity kernel translated by tau.
inline NormalizedKernel phase_kernel(const EnergyGrid& g, double tau) {
    Eigen::MatrixXcd c(g.n_points, g.n_points);
    for (int i = 0; i < g.n_points; ++i) {
        c(i, i) = 1.0;
        for (int j = 0; j < i; ++j) {
            const Complex v = std::polar(1.0, -tau * (g.energy(i) - g.energy(j)));
            c(i, j) = v;
            c(j, i) = std::conj(v);
        }
    }
    return NormalizedKernel{make_kernel(g, std::move(c))};
}

inline NormalizedKernel identity_normalized(const EnergyGrid& g) {
    return phase_kernel(g, 0.0);
}

// Closed-form standard phase shifts.
inline double hard_sphere_delta_std_l0(double k, double a) { return -k * a; }

// Two-region matching for the l = 0 square barrier at E > V0, principal
// value mod pi.
inline double square_barrier_delta_std_l0(double k, double m, double v0, double r0) {
    const double kin2 = k * k - 2.0 * m * v0;
    if (!(kin2 > 0)) throw std::invalid_argument("oracle needs E > V0");
    const double kin = std::sqrt(kin2);
    const double phase = std::atan2(k * std::sin(kin * r0), kin * std::cos(kin * r0));
    double d = phase - k * r0;
    d = std::remainder(d, M_PI);
    if (d <= -M_PI / 2) d += M_PI;
    if (d > M_PI / 2) d -= M_PI;
    return d;
}

// Distance between two angles identified mod pi.
inline double mod_pi_distance(double x, double y) {
    double d = std::remainder(x - y, M_PI);
    return std::abs(d);
}

}  // namespace testutil
