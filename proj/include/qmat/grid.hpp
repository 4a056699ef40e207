#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qmat {

// Uniform 1-D sample grid over [lo, hi], n >= 2 points, endpoints included.
struct Grid1D {
    double lo = 0.0;
    double hi = 1.0;
    int n = 2;

    Grid1D() = default;
    Grid1D(double lo_, double hi_, int n_) : lo(lo_), hi(hi_), n(n_) {
        if (!(hi > lo)) throw std::invalid_argument("Grid1D: hi must exceed lo");
        if (n < 2) throw std::invalid_argument("Grid1D: need at least 2 points");
    }

    double spacing() const { return (hi - lo) / (n - 1); }
    double point(int i) const { return lo + i * spacing(); }

    std::vector<double> points() const {
        std::vector<double> x(n);
        for (int i = 0; i < n; ++i) x[i] = point(i);
        return x;
    }

    // Symmetric grid around 0 with an exact midpoint sample.
    static Grid1D symmetric(double half_width, int n_points) {
        if (n_points % 2 == 0)
            throw std::invalid_argument("Grid1D::symmetric: point count must be odd");
        return Grid1D(-half_width, half_width, n_points);
    }

    bool is_symmetric(double rel = 1e-12) const {
        return std::abs(lo + hi) <= rel * (std::abs(lo) + std::abs(hi));
    }

    int center_index() const {
        if (n % 2 == 0 || !is_symmetric())
            throw std::domain_error("Grid1D: no exact center sample");
        return n / 2;
    }
};

} // namespace qmat
