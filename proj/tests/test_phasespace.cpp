#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <variant>

#include "oracles.hpp"
#include "qmat/phasespace.hpp"

using namespace qmat;
using cplx = std::complex<double>;

namespace {

QuantumMatrixField sampled_gaussian(double dx0, double t, int n, double box) {
    const Grid1D xs = Grid1D::symmetric(box, n);
    const Grid1D xd = Grid1D::symmetric(box, n);
    return pure_to_matrix([&](double x) { return free_gaussian_psi_value(x, dx0, t, {}); }, xs,
                          xd, {});
}

} // namespace

TEST_CASE("plane-wave matrix depends only on the difference coordinate") {
    const Grid1D xs = Grid1D::symmetric(8.0, 65);
    const Grid1D xd = Grid1D::symmetric(8.0, 65);
    const double k0 = 3.0;
    const QuantumMatrixField phi =
        pure_to_matrix([&](double x) { return std::exp(cplx(0.0, k0 * x)); }, xs, xd, {});
    for (int q = 0; q < xd.n; ++q) {
        const cplx expected = std::exp(cplx(0.0, k0 * xd.point(q)));
        for (int i : {0, 17, 64}) REQUIRE(std::abs(phi.values(i, q) - expected) < 1e-12);
    }
    REQUIRE(phi.hermiticity_error() < 1e-12);
}

TEST_CASE("diagonal slice of a pure state is its probability density") {
    const QuantumMatrixField phi = sampled_gaussian(1.0, 0.0, 129, 10.0);
    const int c = phi.xd.center_index();
    for (int i = 0; i < phi.xs.n; ++i) {
        const double x = phi.xs.point(i);
        const double rho = std::norm(free_gaussian_psi_value(x, 1.0, 0.0, {}));
        REQUIRE(std::abs(phi.values(i, c) - cplx(rho)) < 1e-13);
    }
}

TEST_CASE("eigenfunction outer product is real and exchange-symmetric") {
    const BasisSet b = build_basis(4, 10.0);
    const Grid1D xs = Grid1D::symmetric(5.0, 33);
    const Grid1D xd = Grid1D::symmetric(5.0, 33);
    const QuantumMatrixField phi =
        pure_to_matrix([&](double x) { return cplx(eval_mode(b.modes[2], x), 0.0); }, xs, xd, {});
    double max_imag = 0.0, max_swap = 0.0;
    for (int i = 0; i < xs.n; ++i)
        for (int q = 0; q < xd.n; ++q) {
            max_imag = std::max(max_imag, std::abs(phi.values(i, q).imag()));
            max_swap = std::max(max_swap,
                                std::abs(phi.values(i, q) - phi.values(i, xd.n - 1 - q)));
        }
    REQUIRE(max_imag == 0.0);
    REQUIRE(max_swap < 1e-12);
    REQUIRE(phi.hermiticity_error() < 1e-12);
}

TEST_CASE("momentum grid conjugate to the difference grid gives unit-cell closure") {
    const Grid1D xd = Grid1D::symmetric(8.0, 65);
    const Grid1D ps = conjugate_momentum_grid(xd, 1.0);
    REQUIRE(ps.n == xd.n);
    REQUIRE(std::abs(ps.spacing() * xd.spacing() * xd.n - 2.0 * M_PI) < 1e-12);
}

TEST_CASE("plane wave concentrates on a single momentum column") {
    const Grid1D xs = Grid1D::symmetric(8.0, 65);
    const Grid1D xd = Grid1D::symmetric(8.0, 65);
    const Grid1D ps = conjugate_momentum_grid(xd, 1.0);
    const double k0 = 4.0 * ps.spacing(); // on-grid momentum
    const QuantumMatrixField phi =
        pure_to_matrix([&](double x) { return std::exp(cplx(0.0, k0 * x)); }, xs, xd, {});
    const WignerField f = moyal_wigner(phi, ps);
    const int target = ps.center_index() + 4;
    for (int i : {0, 32, 64}) {
        REQUIRE(std::abs(f.values(i, target) - 1.0 / ps.spacing()) < 1e-9 / ps.spacing());
        for (int a = 0; a < ps.n; ++a)
            if (a != target) REQUIRE(std::abs(f.values(i, a)) < 1e-9 / ps.spacing());
    }
}

TEST_CASE("ground-state phase-space density matches the closed form") {
    const Grid1D xs = Grid1D::symmetric(8.0, 129);
    const Grid1D xd = Grid1D::symmetric(8.0, 129);
    const Grid1D ps = conjugate_momentum_grid(xd, 1.0);
    const QuantumMatrixField phi =
        pure_to_matrix([&](double x) { return ho_ground_psi_value(x, 1.0, {}); }, xs, xd, {});
    const WignerField got = moyal_wigner(phi, ps);
    const WignerField want = ho_ground_wigner(1.0, xs, ps, {});
    REQUIRE((got.values - want.values).cwiseAbs().maxCoeff() < 1e-8);
    REQUIRE(std::abs(got.values(xs.center_index(), ps.center_index()) - 1.0 / M_PI) < 1e-8);
}

TEST_CASE("transform output is real for Hermitian input") {
    const QuantumMatrixField phi = sampled_gaussian(0.8, 1.3, 129, 12.0);
    const Grid1D ps = conjugate_momentum_grid(phi.xd, 1.0);
    const WignerField f = moyal_wigner(phi, ps);
    REQUIRE(f.values.allFinite());
    // marginal over momentum recovers the diagonal density
    const int c = phi.xd.center_index();
    for (int i = 0; i < phi.xs.n; i += 8) {
        const double marginal = f.values.row(i).sum() * ps.spacing();
        REQUIRE(std::abs(marginal - phi.values(i, c).real()) < 1e-10);
    }
}

TEST_CASE("non-Hermitian input is rejected by the transform") {
    QuantumMatrixField phi = sampled_gaussian(1.0, 0.0, 33, 8.0);
    phi.values(3, 5) += cplx(0.1, 0.2);
    const Grid1D ps = conjugate_momentum_grid(phi.xd, 1.0);
    REQUIRE_THROWS(moyal_wigner(phi, ps));
}

TEST_CASE("point-state observables are carried analytically") {
    const DeltaState s = free_point_state(2.0, 3.0, 0.0, {});
    const ObservableSet o = observables(s);
    REQUIRE(o.mass == 1.0);
    REQUIRE(o.position == 2.0);
    REQUIRE(o.momentum == 3.0);
    REQUIRE(std::abs(o.energy - 4.5) < 1e-15);
    const DeltaState moved = free_point_state(2.0, 3.0, 1.5, {});
    REQUIRE(std::abs(observables(moved).position - 6.5) < 1e-15);
}

TEST_CASE("plane-wave state has momentum and energy but no position") {
    const DeltaState s = plane_wave_state(2.0, {});
    REQUIRE(!s.has_position);
    REQUIRE(std::abs(s.momentum - 2.0) < 1e-15);
    REQUIRE(std::abs(s.energy - 2.0) < 1e-15);
    REQUIRE(std::isnan(observables(s).position));
}

TEST_CASE("resting packet has zero mean position and momentum") {
    const QuantumMatrixField phi = sampled_gaussian(1.0, 0.0, 257, 12.0);
    const ObservableSet o = observables(phi);
    REQUIRE(std::abs(o.mass - 1.0) < 1e-8);
    REQUIRE(std::abs(o.position) < 1e-10);
    REQUIRE(std::abs(o.momentum) < 1e-10);
    REQUIRE(std::abs(o.energy - 0.25 / 2.0) < 1e-6); // <p^2>/2m = (hbar/2dx0)^2/2m
}

TEST_CASE("oscillator ground-state energy from the matrix field") {
    const Grid1D xs = Grid1D::symmetric(8.0, 257);
    const Grid1D xd = Grid1D::symmetric(8.0, 257);
    const QuantumMatrixField phi =
        pure_to_matrix([&](double x) { return ho_ground_psi_value(x, 1.0, {}); }, xs, xd, {});
    const ObservableSet o = observables(phi, PotentialSpec::harmonic(1.0, 1.0));
    REQUIRE(std::abs(o.energy - 0.5) < 1e-6);
    REQUIRE(std::abs(o.mass - 1.0) < 1e-8);
}

TEST_CASE("distributional potential is rejected by grid observables") {
    const QuantumMatrixField phi = sampled_gaussian(1.0, 0.0, 33, 8.0);
    REQUIRE_THROWS(observables(phi, PotentialSpec::delta_barrier(1.0)));
}

TEST_CASE("phase-space averages of the oscillator ground state") {
    const Grid1D xs = Grid1D::symmetric(8.0, 257);
    const Grid1D ps = Grid1D::symmetric(8.0, 257);
    const WignerField f = ho_ground_wigner(1.0, xs, ps, {});
    const double mass = phase_space_expectation(
        f, [](double) { return 1.0; }, [](double) { return 0.0; });
    REQUIRE(std::abs(mass - 1.0) < 1e-6);

    auto vx = [](double x) { return 0.5 * x * x; };
    auto kp = [](double p) { return 0.5 * p * p; };
    const double e = phase_space_expectation(f, vx, kp);
    REQUIRE(std::abs(e - 0.5) < 1e-6);

    // kinetic and potential pieces are independent, so their variances add
    const double e_kin = phase_space_expectation(f, [](double) { return 0.0; }, kp);
    const double e_kin2 = phase_space_expectation(
        f, [](double) { return 0.0; }, [&](double p) { return kp(p) * kp(p); });
    const double e_pot = phase_space_expectation(f, vx, [](double) { return 0.0; });
    const double e_pot2 = phase_space_expectation(
        f, [&](double x) { return vx(x) * vx(x); }, [](double) { return 0.0; });
    const double de = std::sqrt((e_kin2 - e_kin * e_kin) + (e_pot2 - e_pot * e_pot));
    REQUIRE(std::abs(de - 0.5) < 1e-6);
}

TEST_CASE("free packet marginals follow the spreading law") {
    for (double t : {0.0, 1.0, 2.0}) {
        const Grid1D xs = Grid1D::symmetric(14.0, 257);
        const Grid1D ps = Grid1D::symmetric(10.0, 257);
        const WignerField f = free_gaussian_wigner(1.0, t, xs, ps, {});
        const double m0 = phase_space_expectation(
            f, [](double) { return 1.0; }, [](double) { return 0.0; });
        const double x2 = phase_space_expectation(
            f, [](double x) { return x * x; }, [](double) { return 0.0; });
        const double p2 = phase_space_expectation(
            f, [](double) { return 0.0; }, [](double p) { return p * p; });
        const double dx = std::sqrt(x2 / m0);
        const double dp = std::sqrt(p2 / m0);
        REQUIRE(std::abs(dx - free_gaussian_spread(1.0, t, {})) < 5e-3);
        REQUIRE(std::abs(dp - 0.5) < 5e-3);
        if (t == 0.0) REQUIRE(std::abs(dx * dp - 0.5) < 1e-6);
    }
}

TEST_CASE("free transport rate vanishes on a spatial plateau") {
    const Grid1D xs = Grid1D::symmetric(8.0, 129);
    const Grid1D ps = Grid1D::symmetric(8.0, 129);
    auto plateau = [](double x) {
        const double a = std::abs(x);
        if (a <= 2.0) return 1.0;
        if (a >= 5.0) return 0.0;
        const double c = std::cos(0.5 * M_PI * (a - 2.0) / 3.0);
        return c * c;
    };
    WignerField f;
    f.xs = xs;
    f.ps = ps;
    f.values.resize(xs.n, ps.n);
    for (int i = 0; i < xs.n; ++i)
        for (int a = 0; a < ps.n; ++a)
            f.values(i, a) = plateau(xs.point(i)) * std::exp(-ps.point(a) * ps.point(a));
    const WignerField rate = apply_quantum_generator(f, PotentialSpec::zero());
    for (int i = 0; i < xs.n; ++i) {
        if (std::abs(xs.point(i)) > 1.5) continue; // stencil must stay inside the flat part
        for (int a = 0; a < ps.n; ++a) REQUIRE(rate.values(i, a) == 0.0);
    }
    // and it is nonzero on the shoulders
    REQUIRE(rate.values.cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("generators agree for flat, linear, and quadratic potentials") {
    const Grid1D xs = Grid1D::symmetric(8.0, 257);
    const Grid1D ps = Grid1D::symmetric(8.0, 257);
    const WignerField f = free_gaussian_wigner(0.9, 0.7, xs, ps, {});
    const double fnorm = f.values.norm();
    for (const PotentialSpec& v : {PotentialSpec::zero(), PotentialSpec::linear(0.8),
                                   PotentialSpec::quadratic(0.6)}) {
        const WignerField q = apply_quantum_generator(f, v);
        const WignerField c = apply_classical_generator(f, v);
        REQUIRE((q.values - c.values).norm() < 1e-10 * fnorm);
    }
}

TEST_CASE("quartic potential difference equals the first correction term") {
    const Grid1D xs = Grid1D::symmetric(6.0, 257);
    const Grid1D ps = Grid1D::symmetric(8.0, 257);
    const WignerField f = free_gaussian_wigner(0.8, 0.0, xs, ps, {});
    const PotentialSpec v = PotentialSpec::quartic(0.5);
    const WignerField q = apply_quantum_generator(f, v);
    const WignerField c = apply_classical_generator(f, v);
    const WignerField m1 = moyal_correction(f, v, 1);
    const double scale = std::max(q.values.norm(), 1e-300);
    REQUIRE((q.values - c.values - m1.values).norm() < 1e-8 * scale);
    REQUIRE(m1.values.norm() > 1e-6 * scale);
    // the series for a quartic terminates after the first term
    REQUIRE(moyal_correction(f, v, 2).values.norm() == 0.0);
}

TEST_CASE("correction terms vanish for potentials up to quadratic") {
    const Grid1D xs = Grid1D::symmetric(6.0, 65);
    const Grid1D ps = Grid1D::symmetric(6.0, 65);
    const WignerField f = ho_ground_wigner(1.0, xs, ps, {});
    for (int n : {1, 2, 3}) {
        REQUIRE(moyal_correction(f, PotentialSpec::quadratic(0.5), n).values.norm() == 0.0);
        REQUIRE(moyal_correction(f, PotentialSpec::linear(2.0), n).values.norm() == 0.0);
    }
}

TEST_CASE("oscillator ground state is annihilated by the quantum generator") {
    const Grid1D xs = Grid1D::symmetric(6.0, 513);
    const Grid1D ps = Grid1D::symmetric(6.0, 513);
    const WignerField f = ho_ground_wigner(1.0, xs, ps, {});
    const WignerField rate = apply_quantum_generator(f, PotentialSpec::harmonic(1.0, 1.0));
    REQUIRE(rate.values.norm() < 1e-8 * f.values.norm());
}

TEST_CASE("classical oscillator point traces the energy shell") {
    const PhasePoint start = ho_classical_point(2.0, 0.0, 1.0, 0.0, {});
    REQUIRE(std::abs(start.x) < 1e-15);
    REQUIRE(std::abs(start.p - 2.0) < 1e-14); // sqrt(2 m E)
    for (double t : {0.3, 1.1, 4.0}) {
        const PhasePoint pt = ho_classical_point(2.0, 0.0, 1.0, t, {});
        const double e = 0.5 * pt.p * pt.p + 0.5 * pt.x * pt.x;
        REQUIRE(std::abs(e - 2.0) < 1e-12);
    }
}

TEST_CASE("reference dispatch covers every state kind") {
    ReferenceParams p;
    p.dx0 = 1.0;
    p.omega0 = 1.0;
    p.e0 = 0.5;
    p.x0 = -1.0;
    p.v = 2.0;
    p.k0 = 1.5;
    p.xs = Grid1D::symmetric(6.0, 33);
    p.ps = Grid1D::symmetric(6.0, 33);
    REQUIRE(std::holds_alternative<WignerField>(
        reference_solution(ReferenceKind::FreeGaussian, p, 0.5)));
    REQUIRE(std::holds_alternative<WignerField>(reference_solution(ReferenceKind::HOGround, p)));
    REQUIRE(std::holds_alternative<PhasePoint>(
        reference_solution(ReferenceKind::HOClassical, p, 1.0)));
    REQUIRE(std::holds_alternative<DeltaState>(reference_solution(ReferenceKind::FreePoint, p)));
    REQUIRE(std::holds_alternative<DeltaState>(reference_solution(ReferenceKind::PlaneWave, p)));
}

TEST_CASE("difference-coordinate derivatives of a plane-wave matrix") {
    const Grid1D xs = Grid1D::symmetric(4.0, 33);
    const Grid1D xd = Grid1D::symmetric(4.0, 33);
    const double k0 = 1.2;
    const QuantumMatrixField phi =
        pure_to_matrix([&](double x) { return std::exp(cplx(0.0, k0 * x)); }, xs, xd, {});
    const HierarchyComponents h = extract_hierarchy(phi);
    for (int i = 0; i < xs.n; i += 4) {
        REQUIRE(std::abs(h.phi0[i] - cplx(1.0)) < 1e-12);
        REQUIRE(std::abs(h.phi1[i] - cplx(0.0, k0)) < 1e-3);
        REQUIRE(std::abs(h.phi2[i] - cplx(-k0 * k0)) < 1e-3);
    }
}

TEST_CASE("an unresolved central feature is reported") {
    const Grid1D xs = Grid1D::symmetric(4.0, 9);
    const Grid1D xd = Grid1D::symmetric(4.0, 9);
    QuantumMatrixField phi;
    phi.xs = xs;
    phi.xd = xd;
    phi.values = Eigen::MatrixXcd::Zero(xs.n, xd.n);
    const int c = xd.center_index();
    for (int i = 0; i < xs.n; ++i) {
        // odd imaginary profile whose wide- and narrow-stencil slopes disagree
        phi.values(i, c) = cplx(1.0, 0.0);
        phi.values(i, c + 1) = cplx(0.0, 0.05);
        phi.values(i, c - 1) = cplx(0.0, -0.05);
        phi.values(i, c + 2) = cplx(0.0, -1.0);
        phi.values(i, c - 2) = cplx(0.0, 1.0);
    }
    REQUIRE_THROWS_AS(extract_hierarchy(phi), ResolutionError);
}
