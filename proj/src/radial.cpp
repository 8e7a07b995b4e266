#include "clicktime/radial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace clicktime {

namespace {

// Riccati-Bessel pair: S_l(x) -> sin(x - l pi/2), C_l(x) -> cos(x - l pi/2).
double riccati_s(int ell, double x) { return x * std::sph_bessel(ell, x); }
double riccati_c(int ell, double x) { return -x * std::sph_neumann(ell, x); }

int snap_index(double r, double dr, const char* who) {
    const long i = std::lround(r / dr);
    if (std::abs(i * dr - r) > 1e-9)
        throw std::invalid_argument(std::string(who) +
                                    ": radius is not commensurate with dr");
    return static_cast<int>(i);
}

}  // namespace

double Potential::value(double r) const {
    switch (kind) {
        case Kind::free:
        case Kind::hard_sphere:
            return 0.0;
        case Kind::square_barrier:
            return r <= width ? height : 0.0;
        case Kind::exponential:
            return strength * std::exp(-r / range);
        case Kind::tabulated: {
            if (r_samples.empty() || r >= r_samples.back()) return 0.0;
            if (r <= r_samples.front()) return v_samples.front();
            const auto it =
                std::upper_bound(r_samples.begin(), r_samples.end(), r);
            const std::size_t j = it - r_samples.begin();
            const double t =
                (r - r_samples[j - 1]) / (r_samples[j] - r_samples[j - 1]);
            return (1.0 - t) * v_samples[j - 1] + t * v_samples[j];
        }
    }
    return 0.0;
}

double Potential::grid_value(double r, double dr) const {
    // At a node sitting on the square-barrier edge, use the mean of the
    // one-sided limits; the integrator then keeps its order across the jump.
    if (kind == Kind::square_barrier && std::abs(r - width) < 0.25 * dr)
        return 0.5 * height;
    return value(r);
}

std::string Potential::kind_name() const {
    switch (kind) {
        case Kind::free: return "free";
        case Kind::hard_sphere: return "hard_sphere";
        case Kind::square_barrier: return "square_barrier";
        case Kind::exponential: return "exponential";
        case Kind::tabulated: return "tabulated";
    }
    return "?";
}

Potential free_potential(int ell, double mass) {
    Potential p;
    p.kind = Potential::Kind::free;
    p.ell = ell;
    p.mass = mass;
    return p;
}

Potential hard_sphere(double radius, int ell, double mass) {
    if (!(radius > 0)) throw std::invalid_argument("hard_sphere: radius must be > 0");
    Potential p;
    p.kind = Potential::Kind::hard_sphere;
    p.radius = radius;
    p.ell = ell;
    p.mass = mass;
    return p;
}

Potential square_barrier(double height, double width, int ell, double mass) {
    if (!(width > 0)) throw std::invalid_argument("square_barrier: width must be > 0");
    Potential p;
    p.kind = Potential::Kind::square_barrier;
    p.height = height;
    p.width = width;
    p.ell = ell;
    p.mass = mass;
    return p;
}

Potential exponential_potential(double strength, double range, int ell, double mass) {
    if (!(range > 0))
        throw std::invalid_argument("exponential_potential: range must be > 0");
    Potential p;
    p.kind = Potential::Kind::exponential;
    p.strength = strength;
    p.range = range;
    p.ell = ell;
    p.mass = mass;
    return p;
}

Potential tabulated_potential(std::vector<double> r, std::vector<double> v,
                              int ell, double mass) {
    if (r.size() != v.size() || r.size() < 2)
        throw std::invalid_argument("tabulated_potential: need matching r/V samples");
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
        if (!(r[i] < r[i + 1]))
            throw std::invalid_argument("tabulated_potential: radii must ascend");
    Potential p;
    p.kind = Potential::Kind::tabulated;
    p.r_samples = std::move(r);
    p.v_samples = std::move(v);
    p.ell = ell;
    p.mass = mass;
    return p;
}

double AsymptoticFit::amplitude() const { return std::hypot(alpha, beta); }

AsymptoticFit fit_asymptotic(const RadialSolution& sol, int ell, double r_from) {
    const int i1 = snap_index(r_from, sol.dr, "fit_asymptotic");
    if (i1 < 0 || i1 + 1 >= sol.size())
        throw std::invalid_argument("fit_asymptotic: fit radius outside the grid");
    const double x1 = sol.k * sol.r(i1);
    const double x2 = sol.k * sol.r(i1 + 1);
    const double s1 = riccati_s(ell, x1), c1 = riccati_c(ell, x1);
    const double s2 = riccati_s(ell, x2), c2 = riccati_c(ell, x2);
    const double det = s1 * c2 - s2 * c1;
    AsymptoticFit f;
    f.alpha = (sol.u[i1] * c2 - sol.u[i1 + 1] * c1) / det;
    f.beta = (s1 * sol.u[i1 + 1] - s2 * sol.u[i1]) / det;
    f.r_used = sol.r(i1);
    return f;
}

double asymptotic_residual(const RadialSolution& sol, int ell, double r_from) {
    const AsymptoticFit f = fit_asymptotic(sol, ell, r_from);
    const int i1 = snap_index(r_from, sol.dr, "asymptotic_residual");
    double worst = 0.0;
    for (int i = i1; i < sol.size(); ++i) {
        const double x = sol.k * sol.r(i);
        const double model = f.alpha * riccati_s(ell, x) + f.beta * riccati_c(ell, x);
        worst = std::max(worst, std::abs(sol.u[i] - model));
    }
    return worst / f.amplitude();
}

RadialSolution solve_radial(const Potential& p, double k, double r_max, double dr) {
    if (!(k > 0)) throw std::invalid_argument("solve_radial: need k > 0");
    if (!(dr > 0) || !(r_max > dr))
        throw std::invalid_argument("solve_radial: bad radius grid");
    if (!(k * dr < 0.2))
        throw std::invalid_argument(
            "solve_radial: dr too coarse for this momentum (need k*dr < 0.2)");

    const int n = static_cast<int>(std::lround(r_max / dr)) + 1;
    const double e = 0.5 * k * k / p.mass;
    const int ell = p.ell;
    const double s2 = dr * dr / 12.0;

    auto f_at = [&](int i) -> double {
        if (i == 0) return 0.0;  // multiplies u(0) = 0; the true value may be singular
        const double r = i * dr;
        return 2.0 * p.mass * (p.grid_value(r, dr) - e) + ell * (ell + 1) / (r * r);
    };

    RadialSolution sol;
    sol.dr = dr;
    sol.k = k;
    sol.u.assign(n, 0.0);

    int i0;
    if (p.kind == Potential::Kind::hard_sphere) {
        i0 = snap_index(p.radius, dr, "solve_radial (hard-sphere wall)");
        if (i0 + 2 >= n)
            throw std::invalid_argument("solve_radial: hard-sphere wall too close to r_max");
        sol.i_start = i0;
        sol.u[i0] = 0.0;
        sol.u[i0 + 1] = dr;  // linear departure from the wall
    } else {
        i0 = 0;
        sol.i_start = 0;
        sol.u[0] = 0.0;
        sol.u[1] = std::pow(dr, ell + 1);
        if (n > 2 && ell > 0) sol.u[2] = std::pow(2.0 * dr, ell + 1);
    }

    // Numerov in summed form: with w_i = (1 - s2 f_i) u_i the recursion is
    // w_{i+1} - 2 w_i + w_{i-1} = dr^2 f_i u_i exactly. Accumulating the
    // increment w_{i+1} - w_i with compensation keeps the rounding noise of
    // long oscillatory runs near the truncation floor (the plain three-term
    // form loses ~4 digits of phase over 10^4 steps).
    const int first = (p.kind != Potential::Kind::hard_sphere && ell > 0) ? i0 + 2
                                                                          : i0 + 1;
    std::vector<double> w(n, 0.0);
    w[first - 1] = (1.0 - s2 * f_at(first - 1)) * sol.u[first - 1];
    w[first] = (1.0 - s2 * f_at(first)) * sol.u[first];
    double inc = w[first] - w[first - 1];
    double comp = 0.0;
    double rescale_total = 1.0;
    for (int i = first; i + 1 < n; ++i) {
        const double fc = f_at(i);
        const double add = dr * dr * fc * (w[i] / (1.0 - s2 * fc));
        const double y = add - comp;
        const double t = inc + y;
        comp = (t - inc) - y;
        inc = t;
        w[i + 1] = w[i] + inc;
        if (std::abs(w[i + 1]) > 1e250) {
            for (double& v : w) v *= 1e-250;
            inc *= 1e-250;
            comp *= 1e-250;
            rescale_total *= 1e250;
            if (rescale_total > 1e300)
                throw std::runtime_error(
                    "solve_radial: solution overflow in a classically forbidden "
                    "region; cumulative rescale exceeded 1e300");
        }
    }
    for (int i = 0; i < n; ++i) sol.u[i] = w[i] / (1.0 - s2 * f_at(i));

    const double r_fit = (n - 3) * dr;
    const AsymptoticFit fit = fit_asymptotic(sol, ell, r_fit);
    const double amp = fit.amplitude();
    if (!(amp > 0) || !std::isfinite(amp))
        throw std::runtime_error("solve_radial: asymptotic amplitude fit failed");
    for (double& v : sol.u) v /= amp;
    return sol;
}

double extract_phase_shift(const RadialSolution& sol, const Potential& p,
                           double r_match) {
    if (p.value(r_match) >= 1e-12)
        throw std::invalid_argument(
            "extract_phase_shift: potential not negligible at r_match "
            "(short-range requirement V(r_match) < 1e-12)");
    if (r_match <= p.core_radius())
        throw std::invalid_argument("extract_phase_shift: r_match inside the core");

    int i1 = snap_index(r_match, sol.dr, "extract_phase_shift");
    for (int attempt = 0; attempt < 10; ++attempt, ++i1) {
        if (i1 + 1 >= sol.size())
            throw std::invalid_argument("extract_phase_shift: r_match beyond the grid");
        const double x1 = sol.k * sol.r(i1);
        const double x2 = sol.k * sol.r(i1 + 1);
        const double s1 = riccati_s(p.ell, x1), c1 = riccati_c(p.ell, x1);
        const double s2 = riccati_s(p.ell, x2), c2 = riccati_c(p.ell, x2);
        const double det = s1 * c2 - s2 * c1;
        if (std::abs(det) < 1e-6 * (std::abs(s1 * c2) + std::abs(s2 * c1) + 1e-300))
            continue;  // near-degenerate match, step outward and retry
        const double alpha = (sol.u[i1] * c2 - sol.u[i1 + 1] * c1) / det;
        const double beta = (s1 * sol.u[i1 + 1] - s2 * sol.u[i1]) / det;
        return std::atan(beta / alpha);
    }
    throw std::runtime_error(
        "extract_phase_shift: no well-conditioned matching point found");
}

PhaseShiftTable build_phase_table(const Potential& p,
                                  const std::vector<double>& k_grid,
                                  const RadialParams& params) {
    if (k_grid.size() < 2)
        throw std::invalid_argument("build_phase_table: need at least 2 momenta");
    for (std::size_t i = 0; i + 1 < k_grid.size(); ++i)
        if (!(k_grid[i] < k_grid[i + 1]))
            throw std::invalid_argument("build_phase_table: momenta must ascend");
    if (!(k_grid.front() > 0))
        throw std::invalid_argument("build_phase_table: momenta must be positive");

    PhaseShiftTable t;
    t.mass = p.mass;
    t.k = k_grid;
    const int n = t.size();
    t.delta_std.resize(n);
    t.delta_paper.resize(n);
    t.dDelta_dE.resize(n);

    for (int i = 0; i < n; ++i) {
        const RadialSolution sol = solve_radial(p, k_grid[i], params.r_max, params.dr);
        double raw = extract_phase_shift(sol, p, params.r_match);
        if (i > 0) {
            raw += M_PI * std::round((t.delta_std[i - 1] - raw) / M_PI);
            // the closest branch still jumps by ~pi/2: the two candidates are
            // indistinguishable and the unwrap is ambiguous
            if (std::abs(raw - t.delta_std[i - 1]) >= M_PI / 2 - 1e-9) {
                std::ostringstream msg;
                msg << "build_phase_table: branch unwrap ambiguous between k="
                    << k_grid[i - 1] << " and k=" << k_grid[i]
                    << "; use a finer momentum grid";
                throw std::runtime_error(msg.str());
            }
        }
        t.delta_std[i] = raw;
        t.delta_paper[i] = M_PI + 2.0 * raw;
    }

    // d/dE on a (possibly mildly nonuniform) energy ladder. Central stencil
    // at spacing s, used at s=1 and s=2 for one Richardson combination.
    auto central = [&](int i, int s) {
        const double dm = t.energy(i) - t.energy(i - s);
        const double dp = t.energy(i + s) - t.energy(i);
        return (dm * dm * t.delta_paper[i + s] - dp * dp * t.delta_paper[i - s] +
                (dp * dp - dm * dm) * t.delta_paper[i]) /
               (dm * dp * (dm + dp));
    };
    for (int i = 0; i < n; ++i) {
        if (i == 0)
            t.dDelta_dE[i] = (t.delta_paper[1] - t.delta_paper[0]) /
                             (t.energy(1) - t.energy(0));
        else if (i == n - 1)
            t.dDelta_dE[i] = (t.delta_paper[n - 1] - t.delta_paper[n - 2]) /
                             (t.energy(n - 1) - t.energy(n - 2));
        else if (i < 2 || i > n - 3)
            t.dDelta_dE[i] = central(i, 1);
        else
            t.dDelta_dE[i] = (4.0 * central(i, 1) - central(i, 2)) / 3.0;
    }
    return t;
}

std::vector<std::complex<double>> on_shell_S(const PhaseShiftTable& table) {
    std::vector<std::complex<double>> s(table.size());
    for (int i = 0; i < table.size(); ++i)
        s[i] = std::polar(1.0, table.delta_paper[i]);
    return s;
}

}  // namespace clicktime
