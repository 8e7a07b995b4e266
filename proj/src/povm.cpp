#include "clicktime/povm.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace clicktime {

namespace {

constexpr double kHermTol = 1e-10;
constexpr double kPsdTol = -1e-10;
constexpr double kDiagTol = 1e-12;

void hermitize(Eigen::MatrixXcd& m) { m = 0.5 * (m + m.adjoint()).eval(); }

// Kernel of the duration operator over an arbitrary bounded interval:
// a(E_i,E_j) * integral over I of exp(it(E_i - E_j)) dt.
Eigen::MatrixXcd duration_entries(const EffectKernel& a, TimeInterval I) {
    const EnergyGrid& g = a.kernel.grid;
    const int n = g.n_points;
    const int d = g.fiber_dim;
    std::vector<Complex> win(n);
    for (int dn = 0; dn < n; ++dn) win[dn] = window_integral(dn, I.t_a, I.t_b, g);
    Eigen::MatrixXcd out(g.dim(), g.dim());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Complex wij = i >= j ? win[i - j] : std::conj(win[j - i]);
            out.block(i * d, j * d, d, d) =
                a.kernel.entries.block(i * d, j * d, d, d) * wij;
        }
    return out;
}

void check_inside_horizon(TimeInterval I, const EnergyGrid& g, const char* who) {
    const double lim = g.t_star() * (1.0 + 1e-12);
    if (std::abs(I.t_a) > lim || std::abs(I.t_b) > lim)
        throw std::invalid_argument(std::string(who) +
                                    ": interval exceeds the alias-free horizon");
}

// Diagonal Fourier sums q_dn = sum_{i-j=dn} w^2 Phi_i^* c_ij Phi_j, so that
// p(t) = (1/2pi) (q_0 + 2 Re sum_{dn>=1} q_dn e^{it dn h}).
std::vector<Complex> density_coefficients(const NormalizedKernel& c,
                                          const Section& phi) {
    const EnergyGrid& g = c.kernel.grid;
    const int n = g.n_points;
    const int d = g.fiber_dim;
    const double w2 = g.w * g.w;
    std::vector<Complex> q(n, Complex(0, 0));
    for (int dn = 0; dn < n; ++dn)
        for (int j = 0; j + dn < n; ++j) {
            const int i = j + dn;
            q[dn] += w2 * (phi.values.segment(i * d, d).adjoint() *
                           c.kernel.entries.block(i * d, j * d, d, d) *
                           phi.values.segment(j * d, d))(0, 0);
        }
    return q;
}

double density_at(const std::vector<Complex>& q, double t, const EnergyGrid& g) {
    const double sigma = t / g.t_star();
    double acc = 0.0;
    for (int dn = 1; dn < static_cast<int>(q.size()); ++dn) {
        const double ph = sigma * dn;
        acc += q[dn].real() * cos_pi(ph) - q[dn].imag() * sin_pi(ph);
    }
    return (q[0].real() + 2.0 * acc) / (2.0 * M_PI);
}

void check_normalized(const Section& phi, const char* who) {
    const double n2 = phi.norm() * phi.norm();
    if (std::abs(n2 - 1.0) > 1e-6)
        throw std::invalid_argument(std::string(who) +
                                    ": section must be normalized");
}

void check_boundary_vanishing(const Section& phi, const char* who) {
    const int d = phi.grid.fiber_dim;
    const double sup = phi.values.cwiseAbs().maxCoeff();
    const double head = phi.values.segment(0, d).cwiseAbs().maxCoeff();
    const double tail =
        phi.values.segment(phi.values.size() - d, d).cwiseAbs().maxCoeff();
    if (std::max(head, tail) > 1e-8 * sup)
        throw std::invalid_argument(
            std::string(who) +
            ": section must vanish at the spectrum boundaries (values there "
            "exceed 1e-8 of the sup norm)");
}

}  // namespace

EffectKernel make_effect_kernel(KernelOperator kernel) {
    if (hermiticity_defect(kernel) > kHermTol)
        throw std::invalid_argument(
            "make_effect_kernel: kernel is not hermitian (defect > 1e-10)");
    const double lo = min_eigenvalue(kernel);
    if (lo < kPsdTol)
        throw std::invalid_argument(
            "make_effect_kernel: kernel is not positive semidefinite");
    const int d = kernel.grid.fiber_dim;
    for (int i = 0; i < kernel.grid.n_points; ++i) {
        const Eigen::MatrixXcd blk = kernel.block(i, i);
        const double floor =
            d == 1 ? blk(0, 0).real()
                   : Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(
                         blk, Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .minCoeff();
        if (!(floor > kDiagTol))
            throw std::invalid_argument(
                "make_effect_kernel: diagonal a(E,E) must be strictly positive "
                "at every grid point; degenerate effects are rejected");
    }
    return EffectKernel{std::move(kernel)};
}

NormalizedKernel normalize_kernel(const EffectKernel& a) {
    const EnergyGrid& g = a.kernel.grid;
    const int n = g.n_points;
    const int d = g.fiber_dim;
    Eigen::MatrixXcd out(g.dim(), g.dim());
    if (d == 1) {
        Eigen::VectorXd invroot(n);
        for (int i = 0; i < n; ++i)
            invroot[i] = 1.0 / std::sqrt(a.kernel.entries(i, i).real());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out(i, j) = invroot[i] * a.kernel.entries(i, j) * invroot[j];
        out.diagonal().setOnes();
    } else {
        std::vector<Eigen::MatrixXcd> invroot(n);
        for (int i = 0; i < n; ++i) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
                a.kernel.block(i, i));
            invroot[i] = es.eigenvectors() *
                         es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                         es.eigenvectors().adjoint();
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out.block(i * d, j * d, d, d) =
                    invroot[i] * a.kernel.block(i, j) * invroot[j];
        for (int i = 0; i < n; ++i)
            out.block(i * d, i * d, d, d) = Eigen::MatrixXcd::Identity(d, d);
    }
    return NormalizedKernel{make_kernel(g, std::move(out))};
}

IntervalMeasureKernel interval_kernel(const NormalizedKernel& c, TimeInterval I) {
    if (!(I.t_b > I.t_a))
        throw std::invalid_argument("interval_kernel: need t_b > t_a");
    const EnergyGrid& g = c.kernel.grid;
    check_inside_horizon(I, g, "interval_kernel");
    const int n = g.n_points;
    const int d = g.fiber_dim;
    std::vector<Complex> win(n);
    for (int dn = 0; dn < n; ++dn)
        win[dn] = window_integral(dn, I.t_a, I.t_b, g) / (2.0 * M_PI);
    Eigen::MatrixXcd out(g.dim(), g.dim());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Complex wij = i >= j ? win[i - j] : std::conj(win[j - i]);
            out.block(i * d, j * d, d, d) =
                c.kernel.entries.block(i * d, j * d, d, d) * wij;
        }
    return IntervalMeasureKernel{I, make_kernel(g, std::move(out))};
}

double shift_interval_covariance_check(const NormalizedKernel& c, TimeInterval I,
                                       double t) {
    const EnergyGrid& g = c.kernel.grid;
    const IntervalMeasureKernel base = interval_kernel(c, I);
    const IntervalMeasureKernel shifted =
        interval_kernel(c, TimeInterval{I.t_a + t, I.t_b + t});
    const int n = g.n_points;
    const int d = g.fiber_dim;
    const double sigma = t / g.t_star();
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double ph = sigma * (i - j);
            const Complex conj_phase(cos_pi(ph), sin_pi(ph));
            const double dev = (conj_phase * base.kernel.entries.block(i * d, j * d, d, d) -
                                shifted.kernel.entries.block(i * d, j * d, d, d))
                                   .cwiseAbs()
                                   .maxCoeff();
            worst = std::max(worst, dev);
        }
    return worst;
}

KernelOperator truncated_duration_operator(const EffectKernel& a, TimeWindow T) {
    const EnergyGrid& g = a.kernel.grid;
    if (!(T.half_width >= 0))
        throw std::invalid_argument("truncated_duration_operator: negative window");
    if (T.half_width > g.t_star() * (1.0 + 1e-12))
        throw std::invalid_argument(
            "truncated_duration_operator: window exceeds the alias-free horizon "
            "(aliasing regime)");
    return make_kernel(g, duration_entries(a, {-T.half_width, T.half_width}));
}

NetLimitReport net_limit_check(const EffectKernel& a,
                               const std::vector<double>& half_widths) {
    const EnergyGrid& g = a.kernel.grid;
    if (half_widths.empty())
        throw std::invalid_argument("net_limit_check: empty window list");
    for (std::size_t i = 0; i + 1 < half_widths.size(); ++i)
        if (!(half_widths[i] < half_widths[i + 1]))
            throw std::invalid_argument("net_limit_check: windows must ascend");

    NetLimitReport rep;
    rep.half_widths = half_widths;
    rep.resolvent_min_eig = std::numeric_limits<double>::infinity();
    rep.resolvent_max_eig = -std::numeric_limits<double>::infinity();
    rep.worst_monotonicity = std::numeric_limits<double>::infinity();

    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(g.dim(), g.dim());
    Eigen::MatrixXcd prev;
    for (double T : half_widths) {
        const KernelOperator bT = truncated_duration_operator(a, TimeWindow{T});
        Eigen::MatrixXcd resolvent = (g.w * bT.entries + id).inverse();
        hermitize(resolvent);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(resolvent,
                                                           Eigen::EigenvaluesOnly);
        rep.resolvent_min_eig =
            std::min(rep.resolvent_min_eig, es.eigenvalues().minCoeff());
        rep.resolvent_max_eig =
            std::max(rep.resolvent_max_eig, es.eigenvalues().maxCoeff());
        if (prev.size() > 0) {
            Eigen::MatrixXcd diff = prev - resolvent;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ed(diff,
                                                               Eigen::EigenvaluesOnly);
            rep.worst_monotonicity =
                std::min(rep.worst_monotonicity, ed.eigenvalues().minCoeff());
        }
        prev = std::move(resolvent);
    }
    if (half_widths.size() == 1) rep.worst_monotonicity = 0.0;
    rep.monotone = rep.worst_monotonicity >= -1e-10;
    rep.limit_resolvent = prev;
    rep.duration_operator = prev.inverse() - id;
    hermitize(rep.duration_operator);
    return rep;
}

IntervalMeasureKernel matrix_povm(const EffectKernel& a, TimeInterval I) {
    const EnergyGrid& g = a.kernel.grid;
    if (!(I.t_b >= I.t_a))
        throw std::invalid_argument("matrix_povm: need t_b >= t_a");
    check_inside_horizon(I, g, "matrix_povm");

    const NetLimitReport net = net_limit_check(a, {g.t_star()});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(net.duration_operator);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::runtime_error(
            "matrix_povm: duration operator is singular; the effect diagonal "
            "a(E,E) > 0 should prevent this");
    const Eigen::MatrixXcd invroot =
        es.eigenvectors() *
        es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
        es.eigenvectors().adjoint();

    Eigen::MatrixXcd p = invroot * (g.w * duration_entries(a, I)) * invroot;
    hermitize(p);
    p /= g.w;  // back to kernel convention
    return IntervalMeasureKernel{I, make_kernel(g, std::move(p))};
}

double total_duration_expectation(const EffectKernel& a, const Section& phi) {
    if (!a.kernel.grid.same_grid(phi.grid))
        throw std::invalid_argument("total_duration_expectation: grid mismatch");
    const EnergyGrid& g = a.kernel.grid;
    const int d = g.fiber_dim;
    double acc = 0.0;
    for (int i = 0; i < g.n_points; ++i)
        acc += (phi.values.segment(i * d, d).adjoint() * a.kernel.block(i, i) *
                phi.values.segment(i * d, d))(0, 0)
                   .real();
    return 2.0 * M_PI * g.w * acc;
}

Connection connection(const NormalizedKernel& c) {
    const EnergyGrid& g = c.kernel.grid;
    if (g.n_points < 3)
        throw std::invalid_argument("connection: need at least 3 grid points");
    const int n = g.n_points;
    const Complex mi(0.0, -1.0);
    Connection d{g, {}, 0.0};
    d.values.reserve(n);
    for (int i = 0; i < n; ++i) {
        Eigen::MatrixXcd raw;
        // Interior: central difference in the second slot. Boundaries:
        // second-order one-sided stencil. Only interior points enter the
        // asymmetry diagnostic; the smoothness it measures is theirs.
        if (i == 0)
            raw = mi *
                  (-1.5 * c.kernel.block(0, 0) + 2.0 * c.kernel.block(0, 1) -
                   0.5 * c.kernel.block(0, 2)) /
                  g.h;
        else if (i == n - 1)
            raw = mi *
                  (1.5 * c.kernel.block(n - 1, n - 1) -
                   2.0 * c.kernel.block(n - 1, n - 2) +
                   0.5 * c.kernel.block(n - 1, n - 3)) /
                  g.h;
        else
            raw = mi * (c.kernel.block(i, i + 1) - c.kernel.block(i, i - 1)) /
                  (2.0 * g.h);
        if (i > 0 && i < n - 1) {
            const double asym = 0.5 * (raw - raw.adjoint()).cwiseAbs().maxCoeff();
            d.max_asymmetry = std::max(d.max_asymmetry, asym);
        }
        hermitize(raw);
        d.values.push_back(std::move(raw));
    }
    return d;
}

double Connection::scalar_at(int i) const {
    if (grid.fiber_dim != 1)
        throw std::logic_error("Connection::scalar_at: fiber is not scalar");
    return values[i](0, 0).real();
}

Section apply_time_operator(const NormalizedKernel& c, const Section& phi) {
    if (!c.kernel.grid.same_grid(phi.grid))
        throw std::invalid_argument("apply_time_operator: grid mismatch");
    check_boundary_vanishing(phi, "apply_time_operator");
    const EnergyGrid& g = phi.grid;
    const int n = g.n_points;
    const int d = g.fiber_dim;
    const Connection da = connection(c);
    const Complex mi(0.0, -1.0);
    Eigen::VectorXcd out(g.dim());
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXcd up = i + 1 < n ? phi.values.segment((i + 1) * d, d).eval()
                                        : Eigen::VectorXcd::Zero(d).eval();
        Eigen::VectorXcd dn = i > 0 ? phi.values.segment((i - 1) * d, d).eval()
                                    : Eigen::VectorXcd::Zero(d).eval();
        out.segment(i * d, d) = mi * (up - dn) / (2.0 * g.h) +
                                da.values[i] * phi.values.segment(i * d, d);
    }
    return Section{g, std::move(out)};
}

std::vector<double> click_density(const NormalizedKernel& c, const Section& phi,
                                  const std::vector<double>& t_grid) {
    if (!c.kernel.grid.same_grid(phi.grid))
        throw std::invalid_argument("click_density: grid mismatch");
    check_normalized(phi, "click_density");
    const EnergyGrid& g = phi.grid;
    const double lim = g.t_star() * (1.0 + 1e-12);
    for (double t : t_grid)
        if (std::abs(t) > lim)
            throw std::invalid_argument(
                "click_density: time outside the alias-free window (aliased)");
    const std::vector<Complex> q = density_coefficients(c, phi);
    std::vector<double> p(t_grid.size());
    for (std::size_t m = 0; m < t_grid.size(); ++m)
        p[m] = density_at(q, t_grid[m], g);
    return p;
}

double first_moment(const NormalizedKernel& c, const Section& phi) {
    if (!c.kernel.grid.same_grid(phi.grid))
        throw std::invalid_argument("first_moment: grid mismatch");
    check_normalized(phi, "first_moment");
    check_boundary_vanishing(phi, "first_moment");
    const EnergyGrid& g = phi.grid;
    const std::vector<Complex> q = density_coefficients(c, phi);
    const double ts = g.t_star();

    auto moment_on = [&](int n_t) {
        const double dt = 2.0 * ts / (n_t - 1);
        double acc = 0.0;
        for (int m = 0; m < n_t; ++m) {
            const double t = -ts + m * dt;
            const double f = t * density_at(q, t, g);
            acc += (m == 0 || m == n_t - 1) ? 0.5 * f : f;
        }
        return acc * dt;
    };

    int n_t = 4 * g.n_points + 1;
    double prev = moment_on(n_t);
    for (int level = 0; level < 12; ++level) {
        n_t = 2 * n_t - 1;
        const double cur = moment_on(n_t);
        const double change = std::abs(cur - prev);
        if (change <= 1e-4 * std::max(std::abs(cur), 1e-4)) return cur;
        prev = cur;
    }
    std::ostringstream msg;
    msg << "first_moment: time quadrature did not converge (last grid " << n_t
        << " points, last value " << prev << ")";
    throw std::runtime_error(msg.str());
}

Connection transition_time(const Connection& d1, const Connection& d2) {
    if (!d1.grid.same_grid(d2.grid))
        throw std::invalid_argument("transition_time: grid mismatch");
    Connection out{d1.grid, {}, std::max(d1.max_asymmetry, d2.max_asymmetry)};
    out.values.reserve(d1.values.size());
    for (std::size_t i = 0; i < d1.values.size(); ++i)
        out.values.push_back(d1.values[i] - d2.values[i]);
    return out;
}

double max_norm(const Connection& d) {
    double m = 0.0;
    for (const auto& v : d.values)
        m = std::max(m, v.template lpNorm<2>());
    return m;
}

EffectKernel random_smooth_effect(const EnergyGrid& grid, std::uint64_t seed,
                                  int rank) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int n = grid.n_points;
    const int d = grid.fiber_dim;
    const double range = grid.e_max - grid.e_min;
    const double mid = 0.5 * (grid.e_min + grid.e_max);
    // Phase velocities stay well below the grid's resolvable click time
    // 1/h, so the finite-difference time operator is accurate on these.
    const double tau_scale = 0.002 * grid.t_star();

    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(grid.dim(), grid.dim());
    auto add_component = [&](const Eigen::VectorXcd& gvec, double lambda) {
        a += lambda * gvec * gvec.adjoint();
    };

    // Base term: wide envelope times the fiber identity keeps every
    // diagonal block strictly positive definite.
    {
        const double tau = tau_scale * (2.0 * uni(rng) - 1.0);
        for (int comp = 0; comp < d; ++comp) {
            Eigen::VectorXcd gvec = Eigen::VectorXcd::Zero(grid.dim());
            for (int i = 0; i < n; ++i) {
                const double e = grid.energy(i);
                const double x = (e - mid) / range;
                gvec[i * d + comp] =
                    std::exp(-0.5 * x * x) * std::polar(1.0, -tau * e);
            }
            add_component(gvec, 1.0);
        }
    }
    for (int r = 0; r < rank; ++r) {
        const double center = grid.e_min + range * (0.2 + 0.6 * uni(rng));
        const double width = range * (0.15 + 0.35 * uni(rng));
        const double tau = tau_scale * (2.0 * uni(rng) - 1.0);
        const double omega = (8.0 * M_PI / range) * uni(rng);
        const double lambda = 0.2 + 0.8 * uni(rng);
        Eigen::VectorXcd gvec(grid.dim());
        for (int i = 0; i < n; ++i) {
            const double e = grid.energy(i);
            const double x = (e - center) / width;
            const double env = std::exp(-0.5 * x * x);
            for (int comp = 0; comp < d; ++comp) {
                const double mod =
                    1.0 + 0.3 * std::cos(omega * e + 2.0 * M_PI * (r + comp) / (rank + d));
                gvec[i * d + comp] = env * mod * std::polar(1.0, -tau * e);
            }
        }
        add_component(gvec, lambda);
    }
    hermitize(a);
    a /= a.diagonal().real().maxCoeff();
    return make_effect_kernel(make_kernel(grid, std::move(a)));
}

}  // namespace clicktime
