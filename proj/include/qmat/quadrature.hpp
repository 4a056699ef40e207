#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace qmat {

// Composite Gauss-Legendre rule: `panels` equal panels over the target
// interval, `order` nodes per panel (order in {4, 8, 16}).
struct QuadratureRule {
    int order = 8;
    int panels = 1;
};

namespace detail {

struct GaussTable {
    std::span<const double> nodes;   // positive half, ascending
    std::span<const double> weights;
};

inline GaussTable gauss_table(int order) {
    static const std::array<double, 2> n4 = {0.33998104358485626, 0.86113631159405258};
    static const std::array<double, 2> w4 = {0.65214515486254614, 0.34785484513745386};
    static const std::array<double, 4> n8 = {0.18343464249564980, 0.52553240991632899,
                                             0.79666647741362674, 0.96028985649753623};
    static const std::array<double, 4> w8 = {0.36268378337836198, 0.31370664587788729,
                                             0.22238103445337447, 0.10122853629037626};
    static const std::array<double, 8> n16 = {0.09501250983763744, 0.28160355077925891,
                                              0.45801677765722739, 0.61787624440264375,
                                              0.75540440835500303, 0.86563120238783174,
                                              0.94457502307323258, 0.98940093499164993};
    static const std::array<double, 8> w16 = {0.18945061045506850, 0.18260341504492359,
                                              0.16915651939500254, 0.14959598881657673,
                                              0.12462897125553387, 0.09515851168249278,
                                              0.06225352393864789, 0.02715245941175409};
    switch (order) {
        case 4: return {n4, w4};
        case 8: return {n8, w8};
        case 16: return {n16, w16};
        default: throw std::invalid_argument("gauss_table: supported orders are 4, 8, 16");
    }
}

} // namespace detail

// Nodes and weights of the composite rule on [a, b].
// Weights sum to (b - a) up to roundoff.
inline void gauss_nodes(double a, double b, const QuadratureRule& rule,
                        std::vector<double>& xs, std::vector<double>& ws) {
    if (!(b > a)) throw std::invalid_argument("gauss_nodes: empty interval");
    if (rule.panels < 1) throw std::invalid_argument("gauss_nodes: need at least one panel");
    auto tab = detail::gauss_table(rule.order);
    const double h = (b - a) / rule.panels;
    xs.clear();
    ws.clear();
    xs.reserve(static_cast<size_t>(rule.panels) * rule.order);
    ws.reserve(xs.capacity());
    for (int p = 0; p < rule.panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        const double half = 0.5 * h;
        for (size_t j = 0; j < tab.nodes.size(); ++j) {
            xs.push_back(mid - half * tab.nodes[j]);
            ws.push_back(half * tab.weights[j]);
            xs.push_back(mid + half * tab.nodes[j]);
            ws.push_back(half * tab.weights[j]);
        }
    }
}

template <class F>
double integrate(F&& f, double a, double b, const QuadratureRule& rule = {}) {
    std::vector<double> xs, ws;
    gauss_nodes(a, b, rule, xs, ws);
    double acc = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double v = f(xs[i]);
        if (!std::isfinite(v)) throw std::runtime_error("integrate: non-finite integrand value");
        acc += ws[i] * v;
    }
    return acc;
}

// Panel count so that node spacing resolves wavenumber k_max with at least
// `nodes_per_wavelength` samples per period 2*pi/k_max.
inline int panels_for_wavenumber(double length, double k_max, int order,
                                 int nodes_per_wavelength = 6) {
    if (k_max <= 0.0) return 1;
    const double wavelength = 2.0 * M_PI / k_max;
    const double max_spacing = wavelength / nodes_per_wavelength;
    const double panel_width = max_spacing * order;
    return std::max(1, static_cast<int>(std::ceil(length / panel_width)));
}

} // namespace qmat
