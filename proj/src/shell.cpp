#include "clicktime/shell.hpp"

#include <cmath>
#include <stdexcept>

namespace clicktime {

namespace {

void check_table_matches_grid(const PhaseShiftTable& table, const EnergyGrid& grid,
                              const char* who) {
    if (grid.fiber_dim != 1)
        throw std::invalid_argument(std::string(who) + ": scalar fiber required");
    if (table.size() != grid.n_points)
        throw std::invalid_argument(std::string(who) +
                                    ": momentum range mismatch between phase table "
                                    "and energy grid");
    if (std::abs(table.mass - grid.mass) > 1e-12)
        throw std::invalid_argument(std::string(who) + ": mass mismatch");
    for (int i = 0; i < grid.n_points; ++i)
        if (std::abs(table.k[i] - grid.momentum(i)) > 1e-9 * (1.0 + grid.momentum(i)))
            throw std::invalid_argument(std::string(who) +
                                        ": phase table momenta do not match the grid");
}

}  // namespace

ShellSpec make_shell(double radius, double thickness, double mass) {
    if (!(radius > 0)) throw std::invalid_argument("make_shell: radius must be > 0");
    if (thickness < 0) throw std::invalid_argument("make_shell: thickness must be >= 0");
    if (!(mass > 0)) throw std::invalid_argument("make_shell: mass must be > 0");
    return ShellSpec{radius, thickness, mass};
}

double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

std::vector<Complex> apply_outgoing_selector(const OutgoingSelector& q,
                                             const RadialSolution& sol) {
    const int n = sol.size();
    if (n < 3) throw std::invalid_argument("apply_outgoing_selector: grid too short");
    std::vector<Complex> out(n);
    const Complex iq(0.0, q.sign / sol.k);
    for (int i = 0; i < n; ++i) {
        double du;
        if (i == 0)
            du = (sol.u[1] - sol.u[0]) / sol.dr;
        else if (i == n - 1)
            du = (sol.u[n - 1] - sol.u[n - 2]) / sol.dr;
        else
            du = (sol.u[i + 1] - sol.u[i - 1]) / (2.0 * sol.dr);
        out[i] = iq * du - sol.u[i];
    }
    return out;
}

EffectKernel numerical_effect_kernel(const OutgoingSelector& q,
                                     const ShellSpec& shell,
                                     const EnergyGrid& grid,
                                     const std::vector<RadialSolution>& solutions) {
    if (grid.fiber_dim != 1)
        throw std::invalid_argument("numerical_effect_kernel: scalar fiber required");
    if (!(shell.thickness > 0))
        throw std::invalid_argument(
            "numerical_effect_kernel: need thickness > 0 (the zero-thickness "
            "detector is the closed-form route)");
    if (static_cast<int>(solutions.size()) != grid.n_points)
        throw std::invalid_argument(
            "numerical_effect_kernel: one radial solution per grid point required");
    if (std::abs(shell.mass - grid.mass) > 1e-12)
        throw std::invalid_argument("numerical_effect_kernel: mass mismatch");

    const double dr = solutions.front().dr;
    const int nr = solutions.front().size();
    for (int i = 0; i < grid.n_points; ++i) {
        const RadialSolution& s = solutions[i];
        if (s.dr != dr || s.size() != nr)
            throw std::invalid_argument(
                "numerical_effect_kernel: solutions must share one radial grid");
        if (std::abs(s.k - grid.momentum(i)) > 1e-9 * (1.0 + grid.momentum(i)))
            throw std::invalid_argument(
                "numerical_effect_kernel: solution momenta must match the grid");
    }

    const int ia = static_cast<int>(std::lround(shell.radius / dr));
    const int ib = static_cast<int>(std::lround((shell.radius + shell.thickness) / dr));
    if (ia < 1 || ib <= ia || ib >= nr)
        throw std::invalid_argument(
            "numerical_effect_kernel: shell has no overlap with the radial grid");

    const int m = ib - ia + 1;
    Eigen::MatrixXcd x(m, grid.n_points);
    for (int j = 0; j < grid.n_points; ++j) {
        const std::vector<Complex> qu = apply_outgoing_selector(q, solutions[j]);
        for (int r = 0; r < m; ++r) {
            const double tw = (r == 0 || r == m - 1) ? 0.5 * dr : dr;
            x(r, j) = std::sqrt(tw) * qu[ia + r];
        }
    }
    Eigen::MatrixXcd a = x.adjoint() * x;  // Gram matrix of the shell overlaps
    std::vector<double> scale(grid.n_points);  // m / sqrt(k_i k_j) as s_i s_j
    for (int i = 0; i < grid.n_points; ++i)
        scale[i] = std::sqrt(grid.mass / grid.momentum(i));
    for (int i = 0; i < grid.n_points; ++i)
        for (int j = 0; j < grid.n_points; ++j) a(i, j) *= scale[i] * scale[j];
    a = 0.5 * (a + a.adjoint()).eval();
    return make_effect_kernel(make_kernel(grid, std::move(a)));
}

NormalizedKernel closed_form_c(const ShellSpec& shell, const PhaseShiftTable& table,
                               const EnergyGrid& grid) {
    check_table_matches_grid(table, grid, "closed_form_c");
    if (std::abs(shell.mass - grid.mass) > 1e-12)
        throw std::invalid_argument("closed_form_c: mass mismatch");
    const int n = grid.n_points;
    Eigen::MatrixXcd c(n, n);
    std::vector<double> eta(n);
    for (int i = 0; i < n; ++i)
        eta[i] = table.k[i] * shell.radius + table.delta_paper[i];
    for (int i = 0; i < n; ++i) {
        c(i, i) = 1.0;
        for (int j = 0; j < i; ++j) {
            const double dk = table.k[i] - table.k[j];
            const Complex v =
                sinc(0.5 * shell.thickness * dk) * std::polar(1.0, -(eta[i] - eta[j]));
            c(i, j) = v;
            c(j, i) = std::conj(v);
        }
    }
    return NormalizedKernel{make_kernel(grid, std::move(c))};
}

Connection shell_connection(const ShellSpec& shell, const PhaseShiftTable& table,
                            const EnergyGrid& grid) {
    check_table_matches_grid(table, grid, "shell_connection");
    if (std::abs(shell.mass - grid.mass) > 1e-12)
        throw std::invalid_argument("shell_connection: mass mismatch");
    Connection d{grid, {}, 0.0};
    d.values.reserve(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i) {
        Eigen::MatrixXcd v(1, 1);
        v(0, 0) = grid.mass * shell.radius / table.k[i] + table.dDelta_dE[i];
        d.values.push_back(std::move(v));
    }
    return d;
}

}  // namespace clicktime
