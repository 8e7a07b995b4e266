#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace clicktime;

namespace {

PhaseShiftTable free_table(const EnergyGrid& g) {
    PhaseShiftTable t;
    t.mass = g.mass;
    t.k = g.momenta();
    t.delta_std.assign(t.k.size(), 0.0);
    t.delta_paper.assign(t.k.size(), M_PI);
    t.dDelta_dE.assign(t.k.size(), 0.0);
    return t;
}

PhaseShiftTable hard_sphere_table(const EnergyGrid& g, double a) {
    PhaseShiftTable t;
    t.mass = g.mass;
    t.k = g.momenta();
    for (double k : t.k) {
        t.delta_std.push_back(-k * a);
        t.delta_paper.push_back(M_PI - 2.0 * k * a);
        t.dDelta_dE.push_back(-2.0 * g.mass * a / k);
    }
    return t;
}

std::vector<double> uniform_times(double t0, double t1, int n) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = t0 + (t1 - t0) * i / (n - 1);
    return t;
}

}  // namespace

TEST_CASE("packet sections are normalized, narrow-flagged, and validated") {
    const EnergyGrid g = testutil::standard_grid();
    const WavePacket p{2.0, 0.04};
    CHECK(packet_is_narrow(p));
    CHECK_FALSE(packet_is_narrow(WavePacket{2.0, 0.5}));

    const Section phi = packet_section(p, g);
    CHECK(phi.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(phi.values[0]) == 0.0);
    CHECK(std::abs(phi.values[g.n_points - 1]) == 0.0);

    CHECK_THROWS_AS(packet_section(WavePacket{1.05, 0.04}, g),
                    std::invalid_argument);  // support leaves the grid
    CHECK_THROWS_AS(packet_section(WavePacket{2.0, -0.1}, g),
                    std::invalid_argument);
}

TEST_CASE("free packet clicks at the classical traversal time") {
    const EnergyGrid g = testutil::standard_grid();
    const double R = 10.0, k0 = 2.0;
    const WavePacket packet{k0, 0.04};
    const auto t = uniform_times(-40.0, 50.0, 1801);
    const PacketDensity d = packet_click_density(packet, make_shell(R, 0.0),
                                                 free_table(g), g, t);
    CHECK(d.captured_mass == doctest::Approx(1.0).epsilon(1e-6));
    for (double v : d.p) CHECK(v >= 0.0);

    const std::size_t m = std::max_element(d.p.begin(), d.p.end()) - d.p.begin();
    CHECK(std::abs(t[m] - R / k0) < 0.02 * (R / k0));
}

TEST_CASE("interaction shifts the density rigidly by the Wigner delay") {
    const EnergyGrid g = testutil::standard_grid();
    const double R = 10.0, a = 1.0, k0 = 2.0;
    const WavePacket packet{k0, 0.04};
    const ShellSpec shell = make_shell(R, 0.0);
    const auto t = uniform_times(-40.0, 50.0, 1801);

    const PacketDensity p_free =
        packet_click_density(packet, shell, free_table(g), g, t);
    const PhaseShiftTable tab_hs = hard_sphere_table(g, a);
    const PacketDensity p_int = packet_click_density(packet, shell, tab_hs, g, t);

    const double wigner = wigner_delay_at(tab_hs, k0);
    CHECK(wigner == doctest::Approx(-2.0 * a / k0).epsilon(1e-6));

    const DelayReport rep = measure_shift(p_free.p, p_int.p, t, wigner);
    CHECK(rep.shift_mean == doctest::Approx(-1.0).epsilon(0.05));
    CHECK(rep.peak_reliable);
    CHECK(std::abs(rep.shift_peak - rep.shift_mean) <
          3.0 * rep.sigma_t_free * (packet.sigma_k / packet.k0) + 1e-3);
    CHECK(rep.l1_overlap_residual < 0.02);

    const DelayReport same = measure_shift(p_free.p, p_free.p, t, 0.0);
    CHECK(same.shift_mean == 0.0);
    CHECK(same.shift_peak == 0.0);
    CHECK(same.l1_overlap_residual < 1e-12);
}

TEST_CASE("density shift matches the solver-side Wigner delay (exponential)") {
    const EnergyGrid g = testutil::standard_grid();
    const Potential pot = exponential_potential(5.0, 1.0);
    const PhaseShiftTable tab = build_phase_table(pot, g.momenta());
    const double k0 = 2.0;
    const WavePacket packet{k0, 0.04};
    const ShellSpec shell = make_shell(10.0, 0.0);
    const auto t = uniform_times(-40.0, 50.0, 1801);

    const PacketDensity p_free =
        packet_click_density(packet, shell, free_table(g), g, t);
    const PacketDensity p_int = packet_click_density(packet, shell, tab, g, t);
    const double wigner = wigner_delay_at(tab, k0);
    const DelayReport rep = measure_shift(p_free.p, p_int.p, t, wigner);

    CHECK(std::abs(rep.shift_mean - wigner) < 0.05 * std::abs(wigner));
    CHECK(rep.l1_overlap_residual < 0.02);
}

TEST_CASE("packet mean click time is the classical traversal, both read-outs") {
    const EnergyGrid g = testutil::standard_grid();
    const double R = 10.0, k0 = 2.0;
    const ShellSpec shell = make_shell(R, 0.0);
    const PhaseShiftTable tf = free_table(g);
    const WavePacket packet{k0, 0.04};

    const auto t = uniform_times(-40.0, 50.0, 1801);
    const PacketDensity d = packet_click_density(packet, shell, tf, g, t);
    std::vector<double> f(t.size());
    double mean = 0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        mean += 0.5 * (t[i] * d.p[i] + t[i + 1] * d.p[i + 1]) * (t[i + 1] - t[i]);
    CHECK(std::abs(mean - R / k0) < 0.02 * (R / k0));

    // real packet: the time-operator expectation is the averaged connection
    const Section phi = packet_section(packet, g);
    const NormalizedKernel c_free = closed_form_c(shell, tf, g);
    const double via_op = inner_product(phi, apply_time_operator(c_free, phi)).real();
    CHECK(std::abs(via_op - R / k0) < 0.02 * (R / k0));
}

TEST_CASE("on-shell delay: constant phase, hard sphere, unitarity check") {
    const EnergyGrid g = testutil::standard_grid();
    const Connection d_free = shell_connection(make_shell(10.0, 0.0), free_table(g), g);

    const OnShellS s_free = scalar_on_shell(free_table(g), g);
    for (double v : scalar_delay(eisenbud_wigner(s_free, d_free)))
        CHECK(std::abs(v) < 1e-12);

    const double a = 1.0;
    const OnShellS s_hs = scalar_on_shell(hard_sphere_table(g, a), g);
    const auto delay = scalar_delay(eisenbud_wigner(s_hs, d_free));
    for (int i = 1; i + 1 < g.n_points; i += 5)
        CHECK(std::abs(delay[i] - (-2.0 * a / g.momentum(i))) < 1e-4);

    std::vector<Eigen::MatrixXcd> bad(g.n_points,
                                      Eigen::MatrixXcd::Constant(1, 1, 2.0));
    CHECK_THROWS_AS(matrix_on_shell(g, std::move(bad)), std::invalid_argument);
}

TEST_CASE("matrix-valued channel: eigenvalues follow the phase derivatives") {
    const EnergyGrid g = make_grid(0.5, 4.5, 401, 1.0, 2);
    Eigen::Matrix2cd u;
    const double th = 0.7;
    u << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);

    auto theta1 = [](double e) { return 0.8 * e + 0.1 * std::sin(e); };
    auto theta2 = [](double e) { return -0.5 * e + 0.2 * std::cos(e); };
    std::vector<Eigen::MatrixXcd> values;
    for (int i = 0; i < g.n_points; ++i) {
        const double e = g.energy(i);
        Eigen::Matrix2cd diag = Eigen::Matrix2cd::Zero();
        diag(0, 0) = std::polar(1.0, theta1(e));
        diag(1, 1) = std::polar(1.0, theta2(e));
        values.push_back(u * diag * u.adjoint());
    }
    const OnShellS s = matrix_on_shell(g, std::move(values));

    // scalar connection field on the two-dimensional fiber
    Connection d{g, {}, 0.0};
    for (int i = 0; i < g.n_points; ++i)
        d.values.push_back((2.0 / g.momentum(i)) *
                           Eigen::MatrixXcd::Identity(2, 2));

    const auto delay = eisenbud_wigner(s, d);
    for (int i = 1; i + 1 < g.n_points; i += 9) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(delay[i]);
        const double e = g.energy(i);
        const double d1 = 0.8 + 0.1 * std::cos(e);
        const double d2 = -0.5 - 0.2 * std::sin(e);
        CHECK(std::abs(es.eigenvalues().minCoeff() - std::min(d1, d2)) < 1e-4);
        CHECK(std::abs(es.eigenvalues().maxCoeff() - std::max(d1, d2)) < 1e-4);

        // commutator of a scalar field with S vanishes identically
        const Eigen::MatrixXcd comm =
            d.values[i] * s.values[i] - s.values[i] * d.values[i];
        CHECK(comm.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("operator delay: identity, packet value, and the commutator form") {
    const EnergyGrid g = testutil::standard_grid();
    const PhaseShiftTable tf = free_table(g);
    const ShellSpec shell = make_shell(10.0, 0.0);
    const NormalizedKernel c_free = closed_form_c(shell, tf, g);
    // still narrow, but wide enough that the grid resolves the envelope
    // (the two routes sample the same integral at nodes vs midpoints, an
    // O((h/sigma_E)^2) difference)
    const WavePacket packet{2.0, 0.08};
    const Section phi = packet_section(packet, g);

    // S = 1: no delay
    std::vector<Eigen::MatrixXcd> ones(g.n_points,
                                       Eigen::MatrixXcd::Identity(1, 1));
    const OnShellS s_id = matrix_on_shell(g, std::move(ones));
    CHECK(std::abs(operator_delay(phi, s_id, c_free)) < 1e-12);

    const double a = 1.0;
    const PhaseShiftTable th = hard_sphere_table(g, a);
    const OnShellS s = scalar_on_shell(th, g);
    const double got = operator_delay(phi, s, c_free);
    const double expected = wigner_delay_at(th, packet.k0);
    CHECK(std::abs(got - expected) < 0.01 * std::abs(expected));

    // agreement with the packet-averaged on-shell profile
    const Connection d_free = shell_connection(shell, tf, g);
    const double ew_avg =
        packet_average(scalar_delay(eisenbud_wigner(s, d_free)), phi);
    CHECK(std::abs(got - ew_avg) < 1e-3 * std::abs(ew_avg));

    // <S phi, T S phi> - <phi, T phi> equals <phi, S^dag [T, S] phi>
    Eigen::VectorXcd sphi_v(g.n_points);
    for (int i = 0; i < g.n_points; ++i)
        sphi_v[i] = s.values[i](0, 0) * phi.values[i];
    const Section sphi = make_section(g, std::move(sphi_v));
    const Section t_sphi = apply_time_operator(c_free, sphi);
    Eigen::VectorXcd comm_v(g.n_points);
    const Section t_phi = apply_time_operator(c_free, phi);
    for (int i = 0; i < g.n_points; ++i)
        comm_v[i] = std::conj(s.values[i](0, 0)) * t_sphi.values[i] -
                    t_phi.values[i];
    const Complex via_comm = inner_product(phi, make_section(g, std::move(comm_v)));
    CHECK(std::abs(via_comm.real() - got) < 1e-10);
}
