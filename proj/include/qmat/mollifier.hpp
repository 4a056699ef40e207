#pragma once

#include <cmath>
#include <stdexcept>

namespace qmat {

// Unit-mass bump used to regularize point densities.
//
// Cos4 kind: f(u) = 8/(3*pi*w) * cos^4(u/w) on |u| <= pi/2*w, zero outside;
// C^3 with bounded piecewise-continuous 4th derivative. Gaussian kind:
// standard normal scaled to width w (support treated as 9w for windowing).
struct Mollifier {
    enum class Kind { Cos4, Gaussian };

    Kind kind = Kind::Cos4;
    double width = 1.0;

    Mollifier() = default;
    Mollifier(Kind k, double w) : kind(k), width(w) {
        if (!(w > 0.0)) throw std::invalid_argument("Mollifier: width must be positive");
    }
    static Mollifier cos4(double w) { return Mollifier(Kind::Cos4, w); }
    static Mollifier gaussian(double w) { return Mollifier(Kind::Gaussian, w); }

    double support_half_width() const {
        return kind == Kind::Cos4 ? 0.5 * M_PI * width : 9.0 * width;
    }

    // Derivative orders 0..4.
    double eval(double u, int order = 0) const {
        if (order < 0 || order > 4)
            throw std::invalid_argument("Mollifier::eval: derivative order must be in 0..4");
        if (kind == Kind::Cos4) {
            const double s = u / width;
            if (std::abs(s) >= 0.5 * M_PI) return 0.0;
            const double c = 8.0 / (3.0 * M_PI * width);
            const double c2 = std::cos(2.0 * s), s2 = std::sin(2.0 * s);
            const double c4 = std::cos(4.0 * s), s4 = std::sin(4.0 * s);
            switch (order) {
                case 0: return c * (0.375 + 0.5 * c2 + 0.125 * c4);
                case 1: return c / width * (-s2 - 0.5 * s4);
                case 2: return c / (width * width) * (-2.0 * c2 - 2.0 * c4);
                case 3: return c / (width * width * width) * (4.0 * s2 + 8.0 * s4);
                case 4: return c / (width * width * width * width) * (8.0 * c2 + 32.0 * c4);
            }
        }
        const double s = u / width;
        const double g = std::exp(-0.5 * s * s) / (std::sqrt(2.0 * M_PI) * width);
        const double w2 = width * width;
        switch (order) {
            case 0: return g;
            case 1: return -s / width * g;
            case 2: return (s * s - 1.0) / w2 * g;
            case 3: return s * (3.0 - s * s) / (w2 * width) * g;
            case 4: return (s * s * s * s - 6.0 * s * s + 3.0) / (w2 * w2) * g;
        }
        return 0.0;
    }

    // Integral of eval from -infinity to u; reaches 1 above the support.
    double cumulative(double u) const {
        if (kind == Kind::Cos4) {
            const double s = u / width;
            if (s <= -0.5 * M_PI) return 0.0;
            if (s >= 0.5 * M_PI) return 1.0;
            const double c = 8.0 / (3.0 * M_PI);
            return 0.5 + c * (0.375 * s + 0.25 * std::sin(2.0 * s) + std::sin(4.0 * s) / 32.0);
        }
        return 0.5 * std::erfc(-u / (width * std::sqrt(2.0)));
    }
};

} // namespace qmat
