#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qmat {

// One-dimensional external potential. Polynomial kinds carry analytic
// derivatives of every order; the delta barrier is a distribution and is
// rejected by the grid-based generator pipeline (use the spectral modules).
struct PotentialSpec {
    enum class Kind { Zero, Linear, Quadratic, Quartic, DeltaBarrier, Tabulated };

    Kind kind = Kind::Zero;
    double strength = 0.0; // V = strength * x^p for polynomial kinds; V0 for the barrier
    std::vector<double> table_x; // Tabulated only; strictly increasing
    std::vector<double> table_v;

    static PotentialSpec zero() { return {}; }
    static PotentialSpec linear(double c) { return {Kind::Linear, c, {}, {}}; }
    static PotentialSpec quadratic(double c) { return {Kind::Quadratic, c, {}, {}}; }
    static PotentialSpec quartic(double c) { return {Kind::Quartic, c, {}, {}}; }
    static PotentialSpec harmonic(double mass, double omega0) {
        return quadratic(0.5 * mass * omega0 * omega0);
    }
    static PotentialSpec delta_barrier(double v0) { return {Kind::DeltaBarrier, v0, {}, {}}; }
    static PotentialSpec tabulated(std::vector<double> xs, std::vector<double> vs) {
        if (xs.size() != vs.size() || xs.size() < 2)
            throw std::invalid_argument("PotentialSpec::tabulated: need matching tables, size >= 2");
        for (size_t i = 1; i < xs.size(); ++i)
            if (!(xs[i] > xs[i - 1]))
                throw std::invalid_argument("PotentialSpec::tabulated: abscissae must increase");
        return {Kind::Tabulated, 0.0, std::move(xs), std::move(vs)};
    }

    bool is_distributional() const { return kind == Kind::DeltaBarrier; }

    double value(double x) const {
        switch (kind) {
            case Kind::Zero: return 0.0;
            case Kind::Linear: return strength * x;
            case Kind::Quadratic: return strength * x * x;
            case Kind::Quartic: return strength * x * x * x * x;
            case Kind::DeltaBarrier: return 0.0; // pointwise value away from the spike
            case Kind::Tabulated: return interp(x);
        }
        return 0.0;
    }

    // order >= 1. Tabulated supports order 1 only (centered differences).
    double derivative(double x, int order) const {
        if (order < 1) throw std::invalid_argument("PotentialSpec::derivative: order must be >= 1");
        switch (kind) {
            case Kind::Zero: return 0.0;
            case Kind::Linear: return order == 1 ? strength : 0.0;
            case Kind::Quadratic:
                if (order == 1) return 2.0 * strength * x;
                if (order == 2) return 2.0 * strength;
                return 0.0;
            case Kind::Quartic:
                if (order == 1) return 4.0 * strength * x * x * x;
                if (order == 2) return 12.0 * strength * x * x;
                if (order == 3) return 24.0 * strength * x;
                if (order == 4) return 24.0 * strength;
                return 0.0;
            case Kind::DeltaBarrier:
                throw std::domain_error("PotentialSpec::derivative: delta barrier has no pointwise "
                                        "derivative; use the spectral pipeline");
            case Kind::Tabulated: {
                if (order != 1)
                    throw std::domain_error("PotentialSpec::derivative: tabulated potential supports "
                                            "first derivatives only");
                const double h = (table_x.back() - table_x.front()) /
                                 static_cast<double>(table_x.size() - 1);
                return (interp(x + 0.5 * h) - interp(x - 0.5 * h)) / h;
            }
        }
        return 0.0;
    }

private:
    double interp(double x) const {
        if (x <= table_x.front()) return table_v.front();
        if (x >= table_x.back()) return table_v.back();
        size_t lo = 0, hi = table_x.size() - 1;
        while (hi - lo > 1) {
            const size_t mid = (lo + hi) / 2;
            (table_x[mid] <= x ? lo : hi) = mid;
        }
        const double w = (x - table_x[lo]) / (table_x[hi] - table_x[lo]);
        return (1.0 - w) * table_v[lo] + w * table_v[hi];
    }
};

} // namespace qmat
