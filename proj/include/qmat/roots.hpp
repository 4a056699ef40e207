#pragma once

#include <cmath>
#include <stdexcept>

namespace qmat {

struct BracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bisection on [a, b]; f(a) and f(b) must differ in sign.
// Returns the midpoint of the final bracket; deterministic for fixed inputs.
template <class F>
double find_root_bracketed(F&& f, double a, double b, double tol = 1e-14) {
    if (!(b > a)) throw std::invalid_argument("find_root_bracketed: invalid bracket");
    double fa = f(a);
    double fb = f(b);
    if (!std::isfinite(fa) || !std::isfinite(fb))
        throw std::runtime_error("find_root_bracketed: non-finite endpoint value");
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw BracketError("find_root_bracketed: no sign change on bracket");
    const double scale = std::max({std::abs(a), std::abs(b), 1.0});
    while (b - a > tol * scale) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break; // bracket at floating-point resolution
        const double fm = f(m);
        if (!std::isfinite(fm))
            throw std::runtime_error("find_root_bracketed: non-finite midpoint value");
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

} // namespace qmat
