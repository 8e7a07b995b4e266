#include "clicktime/energy_grid.hpp"

#include <boost/math/special_functions/cos_pi.hpp>
#include <boost/math/special_functions/sin_pi.hpp>

#include <cmath>
#include <stdexcept>

namespace clicktime {

EnergyGrid make_grid(double e_min, double e_max, int n_points, double mass,
                     int fiber_dim) {
    if (!(e_min > 0.0))
        throw std::invalid_argument(
            "make_grid: e_min must be > 0 (momentum map k = sqrt(2mE) "
            "requires strictly positive energies)");
    if (!(e_max > e_min))
        throw std::invalid_argument("make_grid: empty range, need e_max > e_min");
    if (n_points < 2)
        throw std::invalid_argument("make_grid: need n_points >= 2");
    if (!(mass > 0.0)) throw std::invalid_argument("make_grid: mass must be > 0");
    if (fiber_dim < 1)
        throw std::invalid_argument("make_grid: fiber_dim must be >= 1");

    EnergyGrid g;
    g.e_min = e_min;
    g.e_max = e_max;
    g.n_points = n_points;
    g.mass = mass;
    g.fiber_dim = fiber_dim;
    g.h = (e_max - e_min) / (n_points - 1);
    g.w = g.h;
    return g;
}

double EnergyGrid::t_star() const { return M_PI / h; }

std::vector<double> EnergyGrid::momenta() const {
    std::vector<double> k(n_points);
    for (int i = 0; i < n_points; ++i) k[i] = momentum(i);
    return k;
}

bool EnergyGrid::same_grid(const EnergyGrid& o) const {
    return e_min == o.e_min && e_max == o.e_max && n_points == o.n_points &&
           mass == o.mass && fiber_dim == o.fiber_dim;
}

Section make_section(const EnergyGrid& grid, Eigen::VectorXcd values) {
    if (values.size() != grid.dim())
        throw std::invalid_argument("make_section: value length does not match grid");
    return Section{grid, std::move(values)};
}

Section zero_section(const EnergyGrid& grid) {
    return Section{grid, Eigen::VectorXcd::Zero(grid.dim())};
}

double Section::norm() const {
    return std::sqrt(grid.w) * values.norm();
}

Complex inner_product(const Section& a, const Section& b) {
    if (!a.grid.same_grid(b.grid))
        throw std::invalid_argument("inner_product: grid mismatch");
    return a.grid.w * a.values.dot(b.values);  // Eigen dot conjugates the left
}

KernelOperator make_kernel(const EnergyGrid& grid, Eigen::MatrixXcd entries) {
    if (entries.rows() != grid.dim() || entries.cols() != grid.dim())
        throw std::invalid_argument("make_kernel: entry matrix does not match grid");
    return KernelOperator{grid, std::move(entries)};
}

KernelOperator zero_kernel(const EnergyGrid& grid) {
    return KernelOperator{grid, Eigen::MatrixXcd::Zero(grid.dim(), grid.dim())};
}

KernelOperator identity_kernel(const EnergyGrid& grid) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(grid.dim(), grid.dim());
    m /= grid.w;
    return KernelOperator{grid, std::move(m)};
}

Eigen::Block<Eigen::MatrixXcd> KernelOperator::block(int i, int j) {
    const int d = grid.fiber_dim;
    return entries.block(i * d, j * d, d, d);
}

Eigen::Block<const Eigen::MatrixXcd> KernelOperator::block(int i, int j) const {
    const int d = grid.fiber_dim;
    return entries.block(i * d, j * d, d, d);
}

Section apply(const KernelOperator& k, const Section& phi) {
    if (!k.grid.same_grid(phi.grid))
        throw std::invalid_argument("apply: grid mismatch");
    return Section{k.grid, k.grid.w * (k.entries * phi.values)};
}

double hermiticity_defect(const KernelOperator& k) {
    return (k.entries - k.entries.adjoint()).cwiseAbs().maxCoeff();
}

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> weighted_eigensolver(
    const KernelOperator& k, bool with_vectors) {
    if (hermiticity_defect(k) > 1e-10)
        throw std::invalid_argument(
            "eigenvalue analysis: kernel hermiticity defect exceeds 1e-10");
    Eigen::MatrixXcd m = k.grid.w * k.entries;
    m = 0.5 * (m + m.adjoint()).eval();
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(
        m, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
}

}  // namespace

double min_eigenvalue(const KernelOperator& k) {
    return weighted_eigensolver(k, false).eigenvalues().minCoeff();
}

std::pair<double, double> eigenvalue_bounds(const KernelOperator& k) {
    const auto ev = weighted_eigensolver(k, false).eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

double sin_pi(double x) { return boost::math::sin_pi(x); }
double cos_pi(double x) { return boost::math::cos_pi(x); }

Complex window_integral(int dn, double t_a, double t_b, const EnergyGrid& grid) {
    const double delta = dn * grid.h;
    // Removable singularity: series through second order in delta (the
    // branch is only reached when |delta * t| is far below rounding scale).
    if (std::abs(delta) * std::max(std::abs(t_a), std::abs(t_b)) < 1e-8) {
        const double d1 = t_b - t_a;
        const double d2 = t_b * t_b - t_a * t_a;
        const double d3 = t_b * t_b * t_b - t_a * t_a * t_a;
        return Complex(d1 - delta * delta * d3 / 6.0, delta * d2 / 2.0);
    }
    // Difference of antiderivatives exp(i t delta)/(i delta). The phase
    // t*dn*h is evaluated as pi * (t/t_star) * dn, which is an exact
    // integer multiple of pi whenever t = +-t_star; sin_pi/cos_pi then
    // vanish exactly and the full-window integral is an exact discrete
    // delta. Shared endpoints of adjacent intervals produce identical
    // antiderivative values, so additivity holds to a single rounding.
    const double ts = grid.t_star();
    const double pa = (t_a / ts) * dn;
    const double pb = (t_b / ts) * dn;
    const Complex ea(cos_pi(pa), sin_pi(pa));
    const Complex eb(cos_pi(pb), sin_pi(pb));
    return (eb - ea) / Complex(0.0, delta);
}

}  // namespace clicktime
