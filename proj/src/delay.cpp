#include "clicktime/delay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clicktime {

namespace {

double trapezoid(const std::vector<double>& f, const std::vector<double>& t) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        acc += 0.5 * (f[i] + f[i + 1]) * (t[i + 1] - t[i]);
    return acc;
}

void check_time_grid(const std::vector<double>& t_grid, const EnergyGrid& grid,
                     const char* who) {
    if (t_grid.size() < 2)
        throw std::invalid_argument(std::string(who) + ": time grid too short");
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
        if (!(t_grid[i] < t_grid[i + 1]))
            throw std::invalid_argument(std::string(who) + ": time grid must ascend");
    const double lim = grid.t_star() * (1.0 + 1e-12);
    if (std::abs(t_grid.front()) > lim || std::abs(t_grid.back()) > lim)
        throw std::invalid_argument(std::string(who) +
                                    ": time grid leaves the alias-free window");
}

// Linear interpolation with zero extension outside the grid.
double interp_or_zero(const std::vector<double>& f, const std::vector<double>& t,
                      double x) {
    if (x < t.front() || x > t.back()) return 0.0;
    if (x == t.back()) return f.back();
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    const std::size_t j = it - t.begin();
    const double lam = (x - t[j - 1]) / (t[j] - t[j - 1]);
    return (1.0 - lam) * f[j - 1] + lam * f[j];
}

}  // namespace

bool packet_is_narrow(const WavePacket& p) { return p.sigma_k <= 0.05 * p.k0; }

Section packet_section(const WavePacket& p, const EnergyGrid& grid) {
    if (!(p.k0 > 0) || !(p.sigma_k > 0))
        throw std::invalid_argument("packet_section: need k0 > 0 and sigma_k > 0");
    if (grid.fiber_dim != 1)
        throw std::invalid_argument("packet_section: scalar fiber required");
    const double k_lo = p.k0 - 5.0 * p.sigma_k;
    const double k_hi = p.k0 + 5.0 * p.sigma_k;
    if (!(k_lo > grid.momentum(0)) || !(k_hi < grid.momentum(grid.n_points - 1)))
        throw std::invalid_argument(
            "packet_section: 5-sigma support must lie strictly inside the grid's "
            "momentum range");
    Eigen::VectorXcd v(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i) {
        const double x = (grid.momentum(i) - p.k0) / p.sigma_k;
        v[i] = std::abs(x) > 5.0 ? 0.0 : std::exp(-0.25 * x * x);
    }
    const double nrm = std::sqrt(grid.w) * v.norm();
    v /= nrm;
    return make_section(grid, std::move(v));
}

PacketDensity packet_click_density(const WavePacket& packet, const ShellSpec& shell,
                                   const PhaseShiftTable& table,
                                   const EnergyGrid& grid,
                                   const std::vector<double>& t_grid) {
    if (shell.thickness != 0.0)
        throw std::invalid_argument(
            "packet_click_density: factorized densities require the "
            "zero-thickness detector");
    check_time_grid(t_grid, grid, "packet_click_density");
    if (table.size() != grid.n_points)
        throw std::invalid_argument("packet_click_density: table/grid mismatch");
    const Section phi = packet_section(packet, grid);

    const int n = grid.n_points;
    std::vector<Complex> amp(n);
    for (int i = 0; i < n; ++i) {
        const double eta = table.k[i] * shell.radius + table.delta_paper[i];
        amp[i] = grid.w * phi.values[i] * std::polar(1.0, eta);
    }
    PacketDensity out;
    out.p.resize(t_grid.size());
    for (std::size_t m = 0; m < t_grid.size(); ++m) {
        Complex g(0, 0);
        for (int i = 0; i < n; ++i)
            g += amp[i] * std::polar(1.0, -t_grid[m] * grid.energy(i));
        out.p[m] = std::norm(g) / (2.0 * M_PI);
    }
    out.captured_mass = trapezoid(out.p, t_grid);
    if (!(out.captured_mass > 0))
        throw std::runtime_error("packet_click_density: vanishing captured mass");
    for (double& v : out.p) v /= out.captured_mass;
    return out;
}

DelayReport measure_shift(const std::vector<double>& p_free,
                          const std::vector<double>& p_int,
                          const std::vector<double>& t_grid, double wigner_delay) {
    if (p_free.size() != t_grid.size() || p_int.size() != t_grid.size())
        throw std::invalid_argument("measure_shift: size mismatch");
    const double mass_free = trapezoid(p_free, t_grid);
    const double mass_int = trapezoid(p_int, t_grid);
    if (std::abs(mass_free - 1.0) > 1e-2 || std::abs(mass_int - 1.0) > 1e-2)
        throw std::invalid_argument("measure_shift: densities must be normalized");

    auto mean_of = [&](const std::vector<double>& p) {
        std::vector<double> f(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) f[i] = t_grid[i] * p[i];
        return trapezoid(f, t_grid);
    };
    auto peak_of = [&](const std::vector<double>& p, bool& reliable) {
        const std::size_t m =
            std::max_element(p.begin(), p.end()) - p.begin();
        const double pmax = p[m];
        int maxima_above_half = 0;
        for (std::size_t i = 1; i + 1 < p.size(); ++i)
            if (p[i] > p[i - 1] && p[i] > p[i + 1] && p[i] > 0.5 * pmax)
                ++maxima_above_half;
        if (maxima_above_half > 1) reliable = false;
        if (m == 0 || m + 1 == p.size()) return t_grid[m];
        const double denom = p[m - 1] - 2.0 * p[m] + p[m + 1];
        if (denom == 0.0) return t_grid[m];
        const double dt = 0.5 * (t_grid[m + 1] - t_grid[m - 1]);
        return t_grid[m] + 0.5 * dt * (p[m - 1] - p[m + 1]) / denom;
    };

    DelayReport rep;
    rep.wigner_delay_at_k0 = wigner_delay;
    rep.t_mean_free = mean_of(p_free) / mass_free;
    rep.t_mean_int = mean_of(p_int) / mass_int;
    rep.shift_mean = rep.t_mean_int - rep.t_mean_free;
    bool reliable = true;
    rep.t_peak_free = peak_of(p_free, reliable);
    rep.t_peak_int = peak_of(p_int, reliable);
    rep.peak_reliable = reliable;
    rep.shift_peak = rep.t_peak_int - rep.t_peak_free;

    std::vector<double> second(p_free.size());
    for (std::size_t i = 0; i < p_free.size(); ++i) {
        const double d = t_grid[i] - rep.t_mean_free;
        second[i] = d * d * p_free[i];
    }
    rep.sigma_t_free = std::sqrt(std::max(0.0, trapezoid(second, t_grid)));

    std::vector<double> absdiff(p_free.size());
    for (std::size_t i = 0; i < p_free.size(); ++i)
        absdiff[i] = std::abs(interp_or_zero(p_int, t_grid, t_grid[i] + wigner_delay) -
                              p_free[i]);
    rep.l1_overlap_residual = trapezoid(absdiff, t_grid);
    return rep;
}

OnShellS scalar_on_shell(const PhaseShiftTable& table, const EnergyGrid& grid) {
    if (grid.fiber_dim != 1)
        throw std::invalid_argument("scalar_on_shell: scalar fiber required");
    if (table.size() != grid.n_points)
        throw std::invalid_argument("scalar_on_shell: table/grid mismatch");
    const auto s = on_shell_S(table);
    std::vector<Eigen::MatrixXcd> values(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        values[i].resize(1, 1);
        values[i](0, 0) = s[i];
    }
    return OnShellS{grid, std::move(values)};
}

OnShellS matrix_on_shell(const EnergyGrid& grid,
                         std::vector<Eigen::MatrixXcd> values) {
    if (static_cast<int>(values.size()) != grid.n_points)
        throw std::invalid_argument("matrix_on_shell: one matrix per grid point");
    const int d = grid.fiber_dim;
    for (const auto& s : values) {
        if (s.rows() != d || s.cols() != d)
            throw std::invalid_argument("matrix_on_shell: fiber dimension mismatch");
        const double defect =
            (s.adjoint() * s - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
        if (defect > 1e-10)
            throw std::invalid_argument("matrix_on_shell: matrix is not unitary");
    }
    return OnShellS{grid, std::move(values)};
}

std::vector<Eigen::MatrixXcd> eisenbud_wigner(const OnShellS& s, const Connection& d) {
    if (!s.grid.same_grid(d.grid))
        throw std::invalid_argument("eisenbud_wigner: grid mismatch");
    const int n = s.grid.n_points;
    if (n < 2) throw std::invalid_argument("eisenbud_wigner: need >= 2 points");
    const double h = s.grid.h;
    const Complex mi(0.0, -1.0);
    std::vector<Eigen::MatrixXcd> out(n);
    for (int i = 0; i < n; ++i) {
        Eigen::MatrixXcd ds;
        if (i == 0)
            ds = (s.values[1] - s.values[0]) / h;
        else if (i == n - 1)
            ds = (s.values[n - 1] - s.values[n - 2]) / h;
        else
            ds = (s.values[i + 1] - s.values[i - 1]) / (2.0 * h);
        const Eigen::MatrixXcd sd = s.values[i].adjoint();
        Eigen::MatrixXcd t =
            sd * (mi * ds) + sd * (d.values[i] * s.values[i] - s.values[i] * d.values[i]);
        out[i] = 0.5 * (t + t.adjoint());
    }
    return out;
}

std::vector<double> scalar_delay(const std::vector<Eigen::MatrixXcd>& delay) {
    std::vector<double> out(delay.size());
    for (std::size_t i = 0; i < delay.size(); ++i) {
        if (delay[i].rows() != 1)
            throw std::invalid_argument("scalar_delay: fiber is not scalar");
        out[i] = delay[i](0, 0).real();
    }
    return out;
}

double operator_delay(const Section& packet, const OnShellS& s,
                      const NormalizedKernel& c) {
    if (!packet.grid.same_grid(s.grid) || !packet.grid.same_grid(c.kernel.grid))
        throw std::invalid_argument("operator_delay: grid mismatch");
    const int n = packet.grid.n_points;
    const int d = packet.grid.fiber_dim;
    Eigen::VectorXcd outgoing(packet.values.size());
    for (int i = 0; i < n; ++i)
        outgoing.segment(i * d, d) = s.values[i] * packet.values.segment(i * d, d);
    const Section phi_out{packet.grid, std::move(outgoing)};
    const Complex e_out = inner_product(phi_out, apply_time_operator(c, phi_out));
    const Complex e_in = inner_product(packet, apply_time_operator(c, packet));
    return (e_out - e_in).real();
}

double packet_average(const std::vector<double>& profile, const Section& packet) {
    if (packet.grid.fiber_dim != 1)
        throw std::invalid_argument("packet_average: scalar fiber required");
    if (static_cast<int>(profile.size()) != packet.grid.n_points)
        throw std::invalid_argument("packet_average: size mismatch");
    double num = 0.0, den = 0.0;
    for (int i = 0; i < packet.grid.n_points; ++i) {
        const double wgt = std::norm(packet.values[i]);
        num += wgt * profile[i];
        den += wgt;
    }
    return num / den;
}

double wigner_delay_at(const PhaseShiftTable& table, double k0) {
    const double e0 = 0.5 * k0 * k0 / table.mass;
    if (e0 <= table.energy(0) || e0 >= table.energy(table.size() - 1))
        throw std::invalid_argument("wigner_delay_at: k0 outside the table range");
    int j = 1;
    while (table.energy(j) < e0) ++j;
    const double lam = (e0 - table.energy(j - 1)) / (table.energy(j) - table.energy(j - 1));
    return (1.0 - lam) * table.dDelta_dE[j - 1] + lam * table.dDelta_dE[j];
}

}  // namespace clicktime
