#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "qmat/roots.hpp"

namespace qmat {

using cplx = std::complex<double>;

// One eigenmode of the delta-barrier box in normalized units
// (m = hbar = V0 = 1, domain [-L, L]).
//
// Even index n: f(x) = amplitude * cos(k|x| - phi), with tan(phi) = 1/k and
//               k*L = phi + n*pi/2, phi in (0, pi/2); zero slope at |x| = L.
// Odd index n:  f(x) = amplitude * sin(k x), with k*L = (n+1)*pi/2; zero
//               value at |x| = L. Each parity family is self-adjoint on its
//               sector, so distinct modes are mutually orthogonal.
struct ModeSolution {
    int index = 0;
    int parity = +1; // +1 even function, -1 odd function
    double k = 0.0;
    double phi = 0.0;   // 0 for odd modes
    double omega = 0.0; // k^2 / 2
    double amplitude = 1.0;
};

inline ModeSolution solve_mode(int n, double box_half_width) {
    if (n < 0) throw std::invalid_argument("solve_mode: negative mode index");
    const double L = box_half_width;
    if (!(L > 0.0)) throw std::invalid_argument("solve_mode: box half-width must be positive");

    ModeSolution m;
    m.index = n;
    if (n % 2 == 1) {
        m.parity = -1;
        m.k = (n + 1) * M_PI / (2.0 * L);
        m.phi = 0.0;
    } else {
        m.parity = +1;
        // k*L - atan(1/k) - n*pi/2 is monotone on the bracket (n*pi/2, n*pi/2 + pi/2).
        const double lo = n * M_PI / 2.0 / L;
        const double hi = (n * M_PI / 2.0 + M_PI / 2.0) / L;
        auto g = [&](double k) { return k * L - std::atan(1.0 / k) - n * M_PI / 2.0; };
        m.k = find_root_bracketed(g, lo, hi, 1e-15);
        m.phi = std::atan(1.0 / m.k);
    }
    m.omega = 0.5 * m.k * m.k;
    return m;
}

inline double eval_mode(const ModeSolution& m, double x) {
    if (m.parity > 0) return m.amplitude * std::cos(m.k * std::abs(x) - m.phi);
    return m.amplitude * std::sin(m.k * x);
}

// Derivative; at the x = 0 kink of an even mode the symmetric mean (zero) is
// returned and the jump is exposed by kink_jump().
inline double eval_mode_prime(const ModeSolution& m, double x) {
    if (m.parity > 0) {
        if (x == 0.0) return 0.0;
        const double s = x > 0.0 ? 1.0 : -1.0;
        return -m.amplitude * m.k * std::sin(m.k * std::abs(x) - m.phi) * s;
    }
    return m.amplitude * m.k * std::cos(m.k * x);
}

// f'(0+) - f'(0-); zero for odd modes.
inline double kink_jump(const ModeSolution& m) {
    if (m.parity < 0) return 0.0;
    return 2.0 * m.amplitude * m.k * std::sin(m.phi);
}

struct BasisSet {
    double box_half_width = 0.0;
    std::vector<ModeSolution> modes;

    int size() const { return static_cast<int>(modes.size()); }
    double max_wavenumber() const { return modes.empty() ? 0.0 : modes.back().k; }
};

// Modes 0..n_max on [-L, L]. Wavenumbers interlace strictly.
inline BasisSet build_basis(int n_max, double box_half_width) {
    if (n_max < 0) throw std::invalid_argument("build_basis: negative mode count");
    BasisSet b;
    b.box_half_width = box_half_width;
    b.modes.reserve(n_max + 1);
    for (int n = 0; n <= n_max; ++n) b.modes.push_back(solve_mode(n, box_half_width));
    for (int n = 1; n <= n_max; ++n)
        if (!(b.modes[n].k > b.modes[n - 1].k))
            throw std::runtime_error("build_basis: wavenumbers failed to interlace");
    return b;
}

struct ScatteringAmplitudes {
    cplx reflected;
    cplx transmitted;
};

// Stationary scattering on V(x) = V0*delta(x) for incident amplitude a0.
inline ScatteringAmplitudes scattering_amplitudes(double k, double mass = 1.0,
                                                  double hbar = 1.0, double v0 = 1.0,
                                                  cplx a0 = cplx(1.0, 0.0)) {
    if (!(k > 0.0)) throw std::invalid_argument("scattering_amplitudes: k must be positive");
    const cplx denom = cplx(0.0, 1.0) * k * hbar * hbar - mass * v0;
    return {a0 * mass * v0 / denom, a0 * cplx(0.0, 1.0) * k * hbar * hbar / denom};
}

} // namespace qmat
