#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <variant>

#include "qmat/fields.hpp"
#include "qmat/potential.hpp"

namespace qmat {

struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Construction

template <class Psi>
QuantumMatrixField pure_to_matrix(Psi&& psi, const Grid1D& xs, const Grid1D& xd,
                                  PhysicalConstants constants = {}) {
    QuantumMatrixField f;
    f.xs = xs;
    f.xd = xd;
    f.constants = constants;
    f.values.resize(xs.n, xd.n);
    for (int i = 0; i < xs.n; ++i) {
        const double x = xs.point(i);
        for (int j = 0; j < xd.n; ++j) {
            const double d = xd.point(j);
            f.values(i, j) = psi(x + 0.5 * d) * std::conj(psi(x - 0.5 * d));
        }
    }
    f.validate();
    return f;
}

// ---------------------------------------------------------------------------
// Transforms

// Momentum grid conjugate to a difference grid: same count, spacing chosen so
// the transform pair below inverts exactly on sampled fields.
inline Grid1D conjugate_momentum_grid(const Grid1D& xd, double hbar) {
    const double dp = 2.0 * M_PI * hbar / (xd.n * xd.spacing());
    const double half = 0.5 * dp * (xd.n - 1);
    return Grid1D(-half, half, xd.n);
}

namespace detail {

inline Eigen::MatrixXcd forward_kernel(const Grid1D& xd, const Grid1D& ps, double hbar) {
    Eigen::MatrixXcd k(xd.n, ps.n);
    const double scale = xd.spacing() / (2.0 * M_PI * hbar);
    for (int j = 0; j < xd.n; ++j)
        for (int a = 0; a < ps.n; ++a) {
            const double arg = -ps.point(a) * xd.point(j) / hbar;
            k(j, a) = scale * std::complex<double>(std::cos(arg), std::sin(arg));
        }
    return k;
}

inline Eigen::MatrixXcd inverse_kernel(const Grid1D& ps, const Grid1D& xd, double hbar) {
    Eigen::MatrixXcd k(ps.n, xd.n);
    const double scale = ps.spacing();
    for (int a = 0; a < ps.n; ++a)
        for (int j = 0; j < xd.n; ++j) {
            const double arg = ps.point(a) * xd.point(j) / hbar;
            k(a, j) = scale * std::complex<double>(std::cos(arg), std::sin(arg));
        }
    return k;
}

} // namespace detail

// F(x_S, p_S) = 1/(2 pi hbar) * integral of phi(x_S, x_D) exp(-i p x_D / hbar) dx_D.
// Output is real for Hermitian input; Hermiticity violations beyond
// `hermiticity_tol` raise a symmetry error.
inline WignerField moyal_wigner(const QuantumMatrixField& phi, const Grid1D& ps,
                                double hermiticity_tol = 1e-10) {
    phi.validate();
    const double herm = phi.hermiticity_error();
    if (herm > hermiticity_tol)
        throw std::invalid_argument("moyal_wigner: input violates Hermitian symmetry");

    WignerField f;
    f.xs = phi.xs;
    f.ps = ps;
    f.constants = phi.constants;
    const Eigen::MatrixXcd k = detail::forward_kernel(phi.xd, ps, phi.constants.hbar);
    f.values = (phi.values * k).real();
    return f;
}

// ---------------------------------------------------------------------------
// Observables

struct ObservableSet {
    double mass = 0.0;
    double position = 0.0;
    double momentum = 0.0;
    double energy = 0.0;
};

namespace detail {

// Centered stencils across the x_D = 0 column; requires >= 5 samples.
struct CenterDerivs {
    std::complex<double> d1, d2, d3;
};

inline CenterDerivs center_derivatives(const QuantumMatrixField& phi, int row) {
    const int c = phi.xd.center_index();
    if (phi.xd.n < 5)
        throw ResolutionError("center_derivatives: need at least 5 x_D samples");
    const double h = phi.xd.spacing();
    const auto v = [&](int off) { return phi.values(row, c + off); };
    CenterDerivs d;
    d.d1 = (8.0 * (v(1) - v(-1)) - (v(2) - v(-2))) / (12.0 * h);
    d.d2 = (-30.0 * v(0) + 16.0 * (v(1) + v(-1)) - (v(2) + v(-2))) / (12.0 * h * h);
    d.d3 = (-v(-2) + 2.0 * v(-1) - 2.0 * v(1) + v(2)) / (2.0 * h * h * h);
    // Cross-check against the 3-point estimate to catch unresolved features.
    const std::complex<double> d1_3pt = (v(1) - v(-1)) / (2.0 * h);
    const double scale = std::abs(d.d1) + std::abs(d1_3pt);
    if (scale > 1e-12 && std::abs(d.d1 - d1_3pt) > 0.5 * scale)
        throw ResolutionError("center_derivatives: x_D grid does not resolve the central feature");
    return d;
}

} // namespace detail

// Totals over the diagonal slice: mass, position, momentum, energy.
// The potential enters through its pointwise values; distributional kinds are
// rejected.
inline ObservableSet observables(const QuantumMatrixField& phi, const PotentialSpec& v = {}) {
    phi.validate();
    if (v.is_distributional())
        throw std::domain_error("observables: distributional potential; use the spectral pipeline");
    const int c = phi.xd.center_index();
    const double dx = phi.xs.spacing();
    const double hbar = phi.constants.hbar;
    const double m = phi.constants.mass;

    ObservableSet o;
    for (int i = 0; i < phi.xs.n; ++i) {
        const double x = phi.xs.point(i);
        const double rho = phi.values(i, c).real();
        const auto d = detail::center_derivatives(phi, i);
        o.mass += rho * dx;
        o.position += x * rho * dx;
        o.momentum += (-hbar * d.d1.imag()) * dx;
        o.energy += (-hbar * hbar / (2.0 * m) * d.d2.real() + v.value(x) * rho) * dx;
    }
    return o;
}

// Analytic point-localized or plane-wave state; never sampled on grids.
struct DeltaState {
    bool has_position = true;
    double position = 0.0;
    double momentum = 0.0;
    double energy = 0.0;
};

inline ObservableSet observables(const DeltaState& s) {
    ObservableSet o;
    o.mass = 1.0;
    o.position = s.has_position ? s.position : std::nan("");
    o.momentum = s.momentum;
    o.energy = s.energy;
    return o;
}

inline double wigner_mass(const WignerField& f) {
    return f.values.sum() * f.xs.spacing() * f.ps.spacing();
}

// Expectation of g(x, p) = gx(x) + gp(p) against F.
template <class Gx, class Gp>
double phase_space_expectation(const WignerField& f, Gx&& gx, Gp&& gp) {
    f.validate();
    double acc = 0.0;
    for (int i = 0; i < f.xs.n; ++i) {
        const double wx = gx(f.xs.point(i));
        for (int a = 0; a < f.ps.n; ++a) acc += f.values(i, a) * (wx + gp(f.ps.point(a)));
    }
    return acc * f.xs.spacing() * f.ps.spacing();
}

// ---------------------------------------------------------------------------
// Generators

namespace detail {

// 7-point centered first derivative along rows (x_S direction), zero-padded;
// fields are required to decay at the x_S boundary.
inline Eigen::MatrixXd ddx_rows(const Eigen::MatrixXd& f, double h) {
    const int nr = static_cast<int>(f.rows());
    const int nc = static_cast<int>(f.cols());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(nr, nc);
    const double c1 = 3.0 / 4.0, c2 = -3.0 / 20.0, c3 = 1.0 / 60.0;
    auto at = [&](int i, int a) -> double { return (i < 0 || i >= nr) ? 0.0 : f(i, a); };
    for (int i = 0; i < nr; ++i)
        for (int a = 0; a < nc; ++a)
            out(i, a) = (c1 * (at(i + 1, a) - at(i - 1, a)) + c2 * (at(i + 2, a) - at(i - 2, a)) +
                         c3 * (at(i + 3, a) - at(i - 3, a))) /
                        h;
    return out;
}

// Applies an x_D-odd multiplier through the difference representation and
// returns the real rate contribution multiplier/( i hbar ) * F.
template <class Mult>
Eigen::MatrixXd odd_multiplier_rate(const WignerField& f, Mult&& mult) {
    const double hbar = f.constants.hbar;
    const Grid1D xd = conjugate_momentum_grid(f.ps, hbar); // same relation both ways
    const Eigen::MatrixXcd to_xd = inverse_kernel(f.ps, xd, hbar);
    const Eigen::MatrixXcd to_ps = forward_kernel(xd, f.ps, hbar);
    Eigen::MatrixXcd phi = f.values.cast<std::complex<double>>() * to_xd;
    for (int i = 0; i < f.xs.n; ++i) {
        const double x = f.xs.point(i);
        for (int j = 0; j < xd.n; ++j)
            phi(i, j) *= mult(x, xd.point(j)) / std::complex<double>(0.0, hbar);
    }
    return (phi * to_ps).real();
}

} // namespace detail

// Rate dF/dt under the full generator: transport plus the exact potential
// difference V(x_S + x_D/2) - V(x_S - x_D/2) applied in the difference
// representation.
inline WignerField apply_quantum_generator(const WignerField& f, const PotentialSpec& v) {
    f.validate();
    if (v.is_distributional())
        throw std::domain_error("apply_quantum_generator: delta barrier is distributional; use "
                                "the spectral pipeline");
    WignerField rate = f;
    rate.values = detail::ddx_rows(f.values, f.xs.spacing());
    for (int i = 0; i < f.xs.n; ++i)
        for (int a = 0; a < f.ps.n; ++a) rate.values(i, a) *= -f.ps.point(a) / f.constants.mass;
    if (v.kind != PotentialSpec::Kind::Zero) {
        rate.values += detail::odd_multiplier_rate(
            f, [&](double x, double d) { return v.value(x + 0.5 * d) - v.value(x - 0.5 * d); });
    }
    return rate;
}

// Rate dF/dt under the classical generator: transport plus V'(x_S) * x_D
// applied through the same difference-representation path.
inline WignerField apply_classical_generator(const WignerField& f, const PotentialSpec& v) {
    f.validate();
    if (v.is_distributional())
        throw std::domain_error("apply_classical_generator: delta barrier is distributional; use "
                                "the spectral pipeline");
    WignerField rate = f;
    rate.values = detail::ddx_rows(f.values, f.xs.spacing());
    for (int i = 0; i < f.xs.n; ++i)
        for (int a = 0; a < f.ps.n; ++a) rate.values(i, a) *= -f.ps.point(a) / f.constants.mass;
    if (v.kind != PotentialSpec::Kind::Zero) {
        rate.values += detail::odd_multiplier_rate(
            f, [&](double x, double d) { return v.derivative(x, 1) * d; });
    }
    return rate;
}

// Rate contribution of the order-n residual term
// V^(2n+1)(x_S) * x_D^(2n+1) / ((2n+1)! * 2^(2n)), n >= 1.
inline WignerField moyal_correction(const WignerField& f, const PotentialSpec& v, int n) {
    f.validate();
    if (n < 1) throw std::invalid_argument("moyal_correction: order must be >= 1");
    if (v.is_distributional() || v.kind == PotentialSpec::Kind::Tabulated)
        throw std::domain_error("moyal_correction: needs analytic high-order derivatives");
    const int order = 2 * n + 1;
    double fact = 1.0;
    for (int j = 2; j <= order; ++j) fact *= j;
    const double coef = 1.0 / (fact * std::pow(2.0, 2 * n));

    WignerField rate = f;
    bool zero = true;
    // Quick scan: polynomial kinds with vanishing high derivatives yield the
    // zero field without a transform round trip.
    if (v.kind == PotentialSpec::Kind::Quartic && order <= 4) zero = false;
    if (v.kind == PotentialSpec::Kind::Quartic && order > 4) zero = true;
    if (v.kind == PotentialSpec::Kind::Zero || v.kind == PotentialSpec::Kind::Linear ||
        v.kind == PotentialSpec::Kind::Quadratic)
        zero = true;
    if (zero) {
        rate.values.setZero();
        return rate;
    }
    rate.values = detail::odd_multiplier_rate(f, [&](double x, double d) {
        return coef * v.derivative(x, order) * std::pow(d, order);
    });
    return rate;
}

// ---------------------------------------------------------------------------
// Reference states

struct PhasePoint {
    double x = 0.0;
    double p = 0.0;
};

inline std::complex<double> free_gaussian_psi_value(double x, double dx0, double t,
                                                    PhysicalConstants c) {
    const std::complex<double> alpha(1.0, c.hbar * t / (2.0 * c.mass * dx0 * dx0));
    const std::complex<double> norm =
        std::pow(2.0 * M_PI * dx0 * dx0, -0.25) / std::sqrt(alpha);
    return norm * std::exp(-x * x / (4.0 * dx0 * dx0 * alpha));
}

inline double free_gaussian_spread(double dx0, double t, PhysicalConstants c) {
    const double b = c.hbar * t / (2.0 * c.mass * dx0);
    return std::sqrt(dx0 * dx0 + b * b);
}

// Boosted and shifted spreading packet: mean position x0 + p0 t / m, mean
// momentum p0, same spread law as the packet at rest.
inline std::complex<double> free_moving_gaussian_psi(double x, double t, double dx0, double x0,
                                                     double p0, PhysicalConstants c) {
    const double u = x - x0 - p0 * t / c.mass;
    const std::complex<double> boost =
        std::exp(std::complex<double>(0.0, (p0 * x - 0.5 * p0 * p0 * t / c.mass) / c.hbar));
    return boost * free_gaussian_psi_value(u, dx0, t, c);
}

inline std::complex<double> free_moving_gaussian_dpsi(double x, double t, double dx0, double x0,
                                                      double p0, PhysicalConstants c) {
    const double u = x - x0 - p0 * t / c.mass;
    const std::complex<double> alpha(1.0, c.hbar * t / (2.0 * c.mass * dx0 * dx0));
    const std::complex<double> inner(0.0, p0 / c.hbar);
    return (inner - u / (2.0 * dx0 * dx0 * alpha)) *
           free_moving_gaussian_psi(x, t, dx0, x0, p0, c);
}

// Closed-form phase-space density of the free spreading packet.
inline WignerField free_gaussian_wigner(double dx0, double t, const Grid1D& xs, const Grid1D& ps,
                                        PhysicalConstants c = {}) {
    WignerField f;
    f.xs = xs;
    f.ps = ps;
    f.constants = c;
    f.values.resize(xs.n, ps.n);
    for (int i = 0; i < xs.n; ++i)
        for (int a = 0; a < ps.n; ++a) {
            const double x = xs.point(i), p = ps.point(a);
            const double u = x - p * t / c.mass;
            f.values(i, a) = 1.0 / (M_PI * c.hbar) *
                             std::exp(-2.0 * dx0 * dx0 * p * p / (c.hbar * c.hbar) -
                                      u * u / (2.0 * dx0 * dx0));
        }
    return f;
}

inline std::complex<double> ho_ground_psi_value(double x, double omega0, PhysicalConstants c) {
    const double a = c.mass * omega0 / c.hbar;
    return std::pow(a / M_PI, 0.25) * std::exp(-0.5 * a * x * x);
}

inline WignerField ho_ground_wigner(double omega0, const Grid1D& xs, const Grid1D& ps,
                                    PhysicalConstants c = {}) {
    WignerField f;
    f.xs = xs;
    f.ps = ps;
    f.constants = c;
    f.values.resize(xs.n, ps.n);
    for (int i = 0; i < xs.n; ++i)
        for (int a = 0; a < ps.n; ++a) {
            const double x = xs.point(i), p = ps.point(a);
            const double e = p * p / (2.0 * c.mass) + 0.5 * c.mass * omega0 * omega0 * x * x;
            f.values(i, a) = 1.0 / (M_PI * c.hbar) * std::exp(-2.0 * e / (c.hbar * omega0));
        }
    return f;
}

inline double ho_energy_level(int n, double omega0, double hbar) {
    if (n < 0) throw std::invalid_argument("ho_energy_level: negative level");
    return (n + 0.5) * hbar * omega0;
}

inline PhasePoint ho_classical_point(double e0, double phi0, double omega0, double t,
                                     PhysicalConstants c = {}) {
    PhasePoint pt;
    pt.x = std::sqrt(2.0 * e0 / c.mass) / omega0 * std::sin(omega0 * t + phi0);
    pt.p = std::sqrt(2.0 * c.mass * e0) * std::cos(omega0 * t + phi0);
    return pt;
}

inline DeltaState free_point_state(double x0, double v, double t, PhysicalConstants c = {}) {
    DeltaState s;
    s.position = x0 + v * t;
    s.momentum = c.mass * v;
    s.energy = 0.5 * c.mass * v * v;
    return s;
}

inline DeltaState plane_wave_state(double k0, PhysicalConstants c = {}) {
    DeltaState s;
    s.has_position = false;
    s.momentum = c.hbar * k0;
    s.energy = c.hbar * c.hbar * k0 * k0 / (2.0 * c.mass);
    return s;
}

enum class ReferenceKind { FreeGaussian, HOGround, HOClassical, FreePoint, PlaneWave };

struct ReferenceParams {
    double dx0 = 1.0;    // FreeGaussian
    double omega0 = 1.0; // HOGround, HOClassical
    double e0 = 0.5;     // HOClassical
    double phi0 = 0.0;   // HOClassical
    double x0 = 0.0;     // FreePoint
    double v = 0.0;      // FreePoint
    double k0 = 0.0;     // PlaneWave
    Grid1D xs = Grid1D(-10.0, 10.0, 512);
    Grid1D ps = Grid1D(-10.0, 10.0, 512);
    PhysicalConstants constants;
};

using ReferenceState = std::variant<WignerField, DeltaState, PhasePoint>;

inline ReferenceState reference_solution(ReferenceKind kind, const ReferenceParams& p,
                                         double t = 0.0) {
    switch (kind) {
        case ReferenceKind::FreeGaussian:
            return free_gaussian_wigner(p.dx0, t, p.xs, p.ps, p.constants);
        case ReferenceKind::HOGround:
            return ho_ground_wigner(p.omega0, p.xs, p.ps, p.constants);
        case ReferenceKind::HOClassical:
            return ho_classical_point(p.e0, p.phi0, p.omega0, t, p.constants);
        case ReferenceKind::FreePoint: return free_point_state(p.x0, p.v, t, p.constants);
        case ReferenceKind::PlaneWave: return plane_wave_state(p.k0, p.constants);
    }
    throw std::invalid_argument("reference_solution: unknown kind");
}

// Hierarchy components of a sampled field: difference-coordinate derivatives
// 0..3 down the central column, one value per x_S sample.
struct HierarchyComponents {
    std::vector<std::complex<double>> phi0, phi1, phi2, phi3;
};

inline HierarchyComponents extract_hierarchy(const QuantumMatrixField& phi) {
    phi.validate();
    HierarchyComponents h;
    const int c = phi.xd.center_index();
    h.phi0.resize(phi.xs.n);
    h.phi1.resize(phi.xs.n);
    h.phi2.resize(phi.xs.n);
    h.phi3.resize(phi.xs.n);
    for (int i = 0; i < phi.xs.n; ++i) {
        h.phi0[i] = phi.values(i, c);
        const auto d = detail::center_derivatives(phi, i);
        h.phi1[i] = d.d1;
        h.phi2[i] = d.d2;
        h.phi3[i] = d.d3;
    }
    return h;
}

} // namespace qmat
