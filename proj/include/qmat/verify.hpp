#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmat/basis.hpp"
#include "qmat/fields.hpp"
#include "qmat/mollifier.hpp"
#include "qmat/potential.hpp"
#include "qmat/quadrature.hpp"
#include "qmat/targets.hpp"

namespace qmat {

struct CheckResult {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct PhysicsReport {
    std::vector<CheckResult> checks;

    void add(const std::string& name, double value, double threshold) {
        checks.push_back({name, value, threshold, value <= threshold});
    }
    void add_at_least(const std::string& name, double value, double threshold) {
        checks.push_back({name, value, threshold, value >= threshold});
    }
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// ---------------------------------------------------------------------------
// Boundary decay: a trajectory confined to the box interior must be
// negligible over the outer fraction of the domain at every sampled time.

struct BoundaryDecayResult {
    double edge_max = 0.0;
    double peak = 0.0;
    double ratio = 0.0;
    bool pass = false;
};

inline BoundaryDecayResult check_boundary_decay(const Eigen::MatrixXd& field, const Grid1D& x,
                                                double edge_fraction = 0.1, double tol = 1e-6) {
    if (field.cols() != x.n) throw std::invalid_argument("check_boundary_decay: grid mismatch");
    const int edge = std::max(1, static_cast<int>(std::ceil(edge_fraction * x.n)));
    BoundaryDecayResult r;
    r.peak = field.cwiseAbs().maxCoeff();
    r.edge_max = std::max(field.leftCols(edge).cwiseAbs().maxCoeff(),
                          field.rightCols(edge).cwiseAbs().maxCoeff());
    r.ratio = r.peak > 0.0 ? r.edge_max / r.peak : 0.0;
    r.pass = r.edge_max <= tol * r.peak;
    return r;
}

inline BoundaryDecayResult check_boundary_decay(const Eigen::MatrixXcd& field, const Grid1D& x,
                                                double edge_fraction = 0.1, double tol = 1e-6) {
    return check_boundary_decay(Eigen::MatrixXd(field.cwiseAbs()), x, edge_fraction, tol);
}

// Conservation laws require the derivative components to vanish at spatial
// infinity: the first derivative (mass conservation), the position-weighted
// first derivative and the second derivative (mean-motion theorem), and the
// third derivative (energy conservation). On a finite box the sup over the
// outer edge stands in for the limit.
struct ComponentDecayChecks {
    BoundaryDecayResult flux;          // phi1
    BoundaryDecayResult weighted_flux; // x * phi1
    BoundaryDecayResult stress;        // phi2
    BoundaryDecayResult energy_flux;   // phi3

    bool all_pass() const {
        return flux.pass && weighted_flux.pass && stress.pass && energy_flux.pass;
    }
};

inline ComponentDecayChecks component_decay_checks(const TrajectoryComponents& c,
                                                   double edge_fraction = 0.1,
                                                   double tol = 1e-6) {
    ComponentDecayChecks out;
    out.flux = check_boundary_decay(c.phi1, c.x, edge_fraction, tol);
    Eigen::MatrixXcd weighted = c.phi1;
    for (int q = 0; q < c.x.n; ++q) weighted.col(q) *= c.x.point(q);
    out.weighted_flux = check_boundary_decay(weighted, c.x, edge_fraction, tol);
    out.stress = check_boundary_decay(c.phi2, c.x, edge_fraction, tol);
    out.energy_flux = check_boundary_decay(c.phi3, c.x, edge_fraction, tol);
    return out;
}

// ---------------------------------------------------------------------------
// Transport hierarchy residuals
//
// The expansion-coefficient fields of a Hermitian trajectory satisfy
//   d phi1 / dx = -(i m / hbar) d phi0 / dt
//   d phi2 / dx = -(i m / hbar) d phi1 / dt + (m / hbar^2) V'(x) phi0
//   d phi3 / dx = -(i m / hbar) d phi2 / dt + (2 m / hbar^2) V'(x) phi1
// pointwise wherever the potential is smooth. Residuals are evaluated with
// centered differences on the interior of the sampling grids; a symmetric
// window around a distributional potential can be excluded.

struct HierarchyResiduals {
    double r01 = 0.0;
    double r12 = 0.0;
    double r23 = 0.0;
};

inline HierarchyResiduals hierarchy_residuals(const TrajectoryComponents& c,
                                              const PotentialSpec& pot,
                                              PhysicalConstants constants = {},
                                              double exclude_half_width = 0.0) {
    const int nt = static_cast<int>(c.times.size());
    const int nx = c.x.n;
    if (nt < 3) throw std::invalid_argument("hierarchy_residuals: need at least 3 time samples");
    const double dt = c.times[1] - c.times[0];
    for (int r = 1; r + 1 < nt; ++r)
        if (std::abs((c.times[r + 1] - c.times[r]) - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw std::invalid_argument("hierarchy_residuals: time samples must be uniform");
    const double h = c.x.spacing();
    const double m = constants.mass, hbar = constants.hbar;
    const std::complex<double> im(0.0, 1.0);

    const bool distributional = pot.is_distributional();
    auto vprime = [&](double x) { return distributional ? 0.0 : pot.derivative(x, 1); };

    auto excluded = [&](int q) {
        const double x = c.x.point(q);
        return std::abs(x) <= exclude_half_width + 2.0 * h;
    };

    auto residual = [&](const Eigen::MatrixXcd& lower, const Eigen::MatrixXcd& upper,
                        const Eigen::MatrixXcd* source, double source_coef) {
        double worst = 0.0, scale = 0.0;
        for (int r = 1; r + 1 < nt; ++r) {
            for (int q = 1; q + 1 < nx; ++q) {
                if (exclude_half_width > 0.0 && excluded(q)) continue;
                const std::complex<double> dx_up = (upper(r, q + 1) - upper(r, q - 1)) / (2.0 * h);
                const std::complex<double> dt_lo =
                    (lower(r + 1, q) - lower(r - 1, q)) / (2.0 * dt);
                std::complex<double> rhs = -im * (m / hbar) * dt_lo;
                if (source != nullptr)
                    rhs += source_coef * vprime(c.x.point(q)) * (*source)(r, q);
                worst = std::max(worst, std::abs(dx_up - rhs));
                scale = std::max({scale, std::abs(dx_up), std::abs(rhs)});
            }
        }
        return scale > 0.0 ? worst / scale : 0.0;
    };

    HierarchyResiduals out;
    out.r01 = residual(c.phi0, c.phi1, nullptr, 0.0);
    out.r12 = residual(c.phi1, c.phi2, &c.phi0, m / (hbar * hbar));
    out.r23 = residual(c.phi2, c.phi3, &c.phi1, 2.0 * m / (hbar * hbar));
    return out;
}

// ---------------------------------------------------------------------------
// Matching conditions at a point barrier
//
// Integrating the second hierarchy relation across the barrier gives a jump
// of the regular part of phi2; the third relation acquires both a transferred
// singular term and a derivative average. For an ordered mode pair (i, j)
// the time phase is common, so the conditions reduce to coefficient
// identities evaluated from one-sided limits at the origin.

struct JumpResiduals {
    double second_order = 0.0; // regular-part jump of phi2
    double third_order = 0.0;  // jump of phi3
};

inline JumpResiduals pair_jump_residuals(const BasisSet& basis, int i, int j,
                                         double barrier_strength = 1.0,
                                         PhysicalConstants constants = {}) {
    const ModeSolution& mi = basis.modes[i];
    const ModeSolution& mj = basis.modes[j];
    const double m = constants.mass, hbar = constants.hbar;
    const double g = m * barrier_strength / (hbar * hbar);

    const double fi = eval_mode(mi, 0.0);
    const double fj = eval_mode(mj, 0.0);
    // one-sided derivatives at the origin, from the closed forms
    auto prime_side = [](const ModeSolution& mode, int side) {
        if (mode.parity < 0) return mode.amplitude * mode.k; // odd: f' = amp k cos(kx)
        // even: f = amp cos(k|x| - phi), f'(0+) = -amp k sin(-phi) ... derivative of |x|
        const double outward = -mode.amplitude * mode.k * std::sin(-mode.phi);
        return side > 0 ? outward : -outward;
    };
    const double fpi_p = prime_side(mi, +1), fpi_m = prime_side(mi, -1);
    const double fpj_p = prime_side(mj, +1), fpj_m = prime_side(mj, -1);
    const double jump_i = fpi_p - fpi_m;
    const double jump_j = fpj_p - fpj_m;

    // second order: [-(1/2) f_i' f_j'] jump = -g * mean of (f_i f_j)'
    const double lhs2 = -0.5 * (fpi_p * fpj_p - fpi_m * fpj_m);
    const double mean_prod_prime = 0.5 * ((fpi_p * fj + fi * fpj_p) + (fpi_m * fj + fi * fpj_m));
    const double rhs2 = -g * mean_prod_prime;
    const double scale2 = std::max({std::abs(lhs2), std::abs(rhs2), 1e-300});

    // third order: jump of the regular part of phi3
    const double ki2 = mi.k * mi.k, kj2 = mj.k * mj.k;
    const double lhs3 = (-(ki2 + 3.0 * kj2) / 8.0) * (jump_i * fj) +
                        ((3.0 * ki2 + kj2) / 8.0) * (fi * jump_j);
    const double omega = mj.omega - mi.omega;
    // transferred singular weight: g * f_i(0) f_j(0); time derivative brings i*omega;
    // the -(i m / hbar) prefactor makes the contribution real
    const double singular_term = (m / hbar) * omega * g * fi * fj;
    // derivative average of phi1' away from the origin (continuous there)
    const double phi1_prime_mean = 0.5 * (kj2 - ki2) * fi * fj;
    const double rhs3 = singular_term - 2.0 * g * phi1_prime_mean;
    const double scale3 = std::max({std::abs(lhs3), std::abs(rhs3), 1e-300});

    JumpResiduals out;
    out.second_order = std::abs(lhs2 - rhs2) / scale2;
    out.third_order = std::abs(lhs3 - rhs3) / scale3;
    return out;
}

// ---------------------------------------------------------------------------
// Integral invariants of a density trajectory

struct DensityIntegrals {
    std::vector<double> mass, momentum, energy;
};

inline DensityIntegrals density_integrals(const DensityTriple& d) {
    DensityIntegrals out;
    const int nt = static_cast<int>(d.times.size());
    out.mass.resize(nt);
    out.momentum.resize(nt);
    out.energy.resize(nt);
    const double h = d.x.spacing();
    for (int r = 0; r < nt; ++r) {
        double m = 0.0, p = 0.0, e = 0.0;
        for (int q = 0; q < d.x.n; ++q) {
            const double w = (q == 0 || q == d.x.n - 1) ? 0.5 * h : h;
            m += w * d.rho(r, q);
            p += w * d.mom(r, q);
            e += w * d.en(r, q);
        }
        out.mass[r] = m;
        out.momentum[r] = p;
        out.energy[r] = e;
    }
    return out;
}

inline double max_abs_drift(const std::vector<double>& series) {
    if (series.empty()) return 0.0;
    double worst = 0.0;
    for (double v : series) worst = std::max(worst, std::abs(v - series.front()));
    return worst;
}

inline double max_rel_drift(const std::vector<double>& series) {
    if (series.empty()) return 0.0;
    const double base = std::abs(series.front());
    if (base == 0.0) return max_abs_drift(series) > 0.0 ? HUGE_VAL : 0.0;
    return max_abs_drift(series) / base;
}

// ---------------------------------------------------------------------------
// Mean-motion consistency: d<x>/dt must equal <p>/m along a trajectory.

inline double ehrenfest_residual(const std::vector<double>& times,
                                 const std::vector<double>& position,
                                 const std::vector<double>& momentum, double mass) {
    const int nt = static_cast<int>(times.size());
    if (nt < 3) throw std::invalid_argument("ehrenfest_residual: need at least 3 samples");
    double worst = 0.0, scale = 0.0;
    for (int r = 1; r + 1 < nt; ++r) {
        const double dq = (position[r + 1] - position[r - 1]) / (times[r + 1] - times[r - 1]);
        const double v = momentum[r] / mass;
        worst = std::max(worst, std::abs(dq - v));
        scale = std::max({scale, std::abs(dq), std::abs(v)});
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

// ---------------------------------------------------------------------------
// Level-spacing commensurability with a classical period: the transition
// frequency between two levels must be an integer multiple of 2 pi / T.

inline double quantization_residual(double omega_a, double omega_b, double classical_period) {
    const double ratio = std::abs(omega_a - omega_b) * classical_period / (2.0 * M_PI);
    return std::abs(ratio - std::round(ratio));
}

// ---------------------------------------------------------------------------
// Interference contrast: complex amplitude of the e^{i q x} component of a
// profile over a window trimmed to a whole number of periods. A profile
// rho0 + 2 Re(c e^{i q x}) returns 2 c; a flat profile returns ~0.

inline std::complex<double> oscillation_coefficient(const std::function<double(double)>& f,
                                                    double q, double x_lo, double x_hi) {
    if (!(q > 0.0) || !(x_hi > x_lo))
        throw std::invalid_argument("oscillation_coefficient: bad window or wavenumber");
    const double period = 2.0 * M_PI / q;
    const int cycles = static_cast<int>(std::floor((x_hi - x_lo) / period));
    if (cycles < 1)
        throw std::invalid_argument("oscillation_coefficient: window shorter than one period");
    const double w = cycles * period;
    const int panels = std::max(6 * cycles, 8);
    std::vector<double> xs, ws;
    gauss_nodes(x_lo, x_lo + w, QuadratureRule{8, panels}, xs, ws);
    double mean = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) mean += ws[i] * f(xs[i]);
    mean /= w;
    std::complex<double> acc(0.0, 0.0);
    for (size_t i = 0; i < xs.size(); ++i)
        acc += ws[i] * (f(xs[i]) - mean) * std::exp(std::complex<double>(0.0, -q * xs[i]));
    return 2.0 * acc / w;
}

// rho^4-weighted spatial spread of a lone packet shape, the floor used by
// localization checks on synthesized trajectories.
inline double mollifier_spread(const Mollifier& f) {
    const double s = f.support_half_width();
    const QuadratureRule rule{8, 64};
    const double w_sum = integrate(
        [&](double u) {
            const double v = f.eval(u, 0);
            return v * v * v * v;
        },
        -s, s, rule);
    const double x2_sum = integrate(
        [&](double u) {
            const double v = f.eval(u, 0);
            return u * u * v * v * v * v;
        },
        -s, s, rule);
    return std::sqrt(x2_sum / w_sum);
}

} // namespace qmat
