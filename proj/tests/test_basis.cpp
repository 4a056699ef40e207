#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "qmat/basis.hpp"
#include "qmat/quadrature.hpp"

using namespace qmat;

TEST_CASE("first odd mode wavenumber is pi over the box width") {
    const ModeSolution m = solve_mode(1, 100.0);
    REQUIRE(m.parity < 0);
    REQUIRE(m.phi == 0.0);
    REQUIRE(std::abs(m.k - M_PI / 100.0) < 1e-14);
    REQUIRE(std::abs(m.omega - 0.5 * m.k * m.k) < 1e-15);
}

TEST_CASE("lowest even mode matches an independent bisection") {
    const ModeSolution m = solve_mode(0, 100.0);
    REQUIRE(m.parity > 0);
    // phase equation: phi tan(phi) = L, wavenumber = phi / L
    const double phi_ref = oracle::bisect(
        [](double phi) { return phi * std::tan(phi) - 100.0; }, 0.1, 0.5 * M_PI - 1e-12, 1e-15);
    REQUIRE(std::abs(m.phi - phi_ref) < 1e-12);
    REQUIRE(std::abs(m.k - phi_ref / 100.0) < 1e-14);
    REQUIRE(std::abs(m.k * std::tan(m.phi) - 1.0) < 1e-10);
}

TEST_CASE("even-mode phases shrink as the wavenumber grows") {
    const double L = 10.0;
    double last_phi = M_PI;
    for (int n : {10, 40, 160, 640}) {
        const ModeSolution m = solve_mode(n, L);
        REQUIRE(m.phi < last_phi);
        REQUIRE(std::abs(m.k * L - (m.phi + 0.5 * n * M_PI)) < 1e-10 * m.k * L);
        last_phi = m.phi;
    }
    REQUIRE(last_phi < 0.02);
}

TEST_CASE("mode values at the center") {
    const BasisSet b = build_basis(6, 20.0);
    for (const auto& m : b.modes) {
        if (m.parity > 0)
            REQUIRE(std::abs(eval_mode(m, 0.0) - m.amplitude * std::cos(m.phi)) < 1e-14);
        else
            REQUIRE(eval_mode(m, 0.0) == 0.0);
    }
}

TEST_CASE("derivative jump at the center matches one-sided differences") {
    const BasisSet b = build_basis(8, 20.0);
    const double h = 1e-6;
    for (const auto& m : b.modes) {
        const double fd_jump =
            ((eval_mode(m, h) - eval_mode(m, 0.0)) - (eval_mode(m, 0.0) - eval_mode(m, -h))) / h;
        const double expected = m.parity > 0 ? 2.0 * m.amplitude * m.k * std::sin(m.phi) : 0.0;
        REQUIRE(std::abs(kink_jump(m) - expected) < 1e-12);
        REQUIRE(std::abs(fd_jump - expected) < 1e-4);
    }
}

TEST_CASE("second derivative balances the dispersion away from the center") {
    const BasisSet b = build_basis(6, 15.0);
    const double h = 0.01;
    for (const auto& m : b.modes) {
        for (double x : {-9.5, -3.1, 1.7, 8.4}) {
            const double d2 = (-eval_mode(m, x + 2 * h) + 16.0 * eval_mode(m, x + h) -
                               30.0 * eval_mode(m, x) + 16.0 * eval_mode(m, x - h) -
                               eval_mode(m, x - 2 * h)) /
                              (12.0 * h * h);
            REQUIRE(std::abs(d2 + m.k * m.k * eval_mode(m, x)) < 1e-8);
        }
    }
}

TEST_CASE("box edge conditions hold for every mode") {
    const double L = 40.0;
    const BasisSet b = build_basis(30, L);
    for (const auto& m : b.modes) {
        if (m.parity > 0)
            REQUIRE(std::abs(eval_mode_prime(b.modes[m.index], L)) < 1e-10 * m.k);
        else
            REQUIRE(std::abs(eval_mode(m, L)) < 1e-10);
    }
}

TEST_CASE("wavenumbers interlace strictly and solve their equations") {
    const BasisSet b = build_basis(40, 40.0);
    for (int n = 1; n < b.size(); ++n) REQUIRE(b.modes[n].k > b.modes[n - 1].k);
    for (const auto& m : b.modes) {
        if (m.parity < 0) {
            REQUIRE(std::abs(m.k * 40.0 - 0.5 * (m.index + 1) * M_PI) < 1e-10);
        } else {
            REQUIRE(std::abs(m.k * std::sin(m.phi) - std::cos(m.phi)) < 1e-12);
            REQUIRE(std::abs(m.k * 40.0 - (0.5 * m.index * M_PI + m.phi)) < 1e-10 * (1.0 + m.k * 40.0));
        }
    }
}

TEST_CASE("distinct modes are orthogonal under brute-force integration") {
    const double L = 20.0;
    const BasisSet b = build_basis(14, L);
    const double kmax = b.max_wavenumber();
    const int panels = oracle::panels_for(-L, L, 2.0 * kmax);
    std::vector<double> norms(b.size());
    for (int n = 0; n < b.size(); ++n)
        norms[n] = std::sqrt(oracle::integrate(
            [&](double x) {
                const double v = oracle::mode_value(b.modes[n], x);
                return v * v;
            },
            -L, L, panels));
    for (int m = 0; m < b.size(); ++m)
        for (int n = m + 1; n < b.size(); ++n) {
            const double overlap = oracle::integrate(
                [&](double x) {
                    return oracle::mode_value(b.modes[m], x) * oracle::mode_value(b.modes[n], x);
                },
                -L, L, panels);
            REQUIRE(std::abs(overlap) < 1e-8 * norms[m] * norms[n]);
        }
}

TEST_CASE("scattering probabilities are conserved and symmetric at the matched speed") {
    const auto amp = scattering_amplitudes(1.0);
    const double t = std::norm(amp.transmitted);
    const double r = std::norm(amp.reflected);
    REQUIRE(std::abs(t - 0.5) < 1e-14);
    REQUIRE(std::abs(r - 0.5) < 1e-14);
    REQUIRE(std::abs(t + r - 1.0) < 1e-14);
}

TEST_CASE("transmission probability at twice the matched wavenumber") {
    const auto amp = scattering_amplitudes(2.0);
    // 1 / (1 + (m v0 / (hbar^2 k))^2) with unit constants
    REQUIRE(std::abs(std::norm(amp.transmitted) - 0.8) < 1e-14);
}

TEST_CASE("barrier becomes transparent at high speed") {
    const auto amp = scattering_amplitudes(1e6);
    REQUIRE(std::norm(amp.transmitted) > 1.0 - 1e-11);
}

TEST_CASE("probability conservation across a wide wavenumber sweep") {
    for (int i = 0; i < 100; ++i) {
        const double k = 0.1 * std::pow(100.0, (i + 1) / 100.0);
        const auto amp = scattering_amplitudes(k);
        REQUIRE(std::abs(std::norm(amp.reflected) + std::norm(amp.transmitted) - 1.0) < 1e-12);
    }
}

TEST_CASE("nonpositive wavenumber is rejected") {
    REQUIRE_THROWS(scattering_amplitudes(0.0));
    REQUIRE_THROWS(scattering_amplitudes(-1.0));
}

TEST_CASE("smallest basis has one even and one odd mode") {
    const BasisSet b = build_basis(1, 10.0);
    REQUIRE(b.size() == 2);
    REQUIRE(b.modes[0].parity > 0);
    REQUIRE(b.modes[1].parity < 0);
}
