#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qmat/basis.hpp"
#include "qmat/fields.hpp"
#include "qmat/grid.hpp"
#include "qmat/mollifier.hpp"
#include "qmat/quadrature.hpp"

namespace qmat {

// Densities sampled on (time list) x (x grid); row r holds time times[r].
struct DensityTriple {
    Grid1D x;
    std::vector<double> times;
    Eigen::MatrixXd rho, mom, en;
};

// Hierarchy components phi^(0..3) on the same layout; used by the physics
// checks.
struct TrajectoryComponents {
    Grid1D x;
    std::vector<double> times;
    Eigen::MatrixXcd phi0, phi1, phi2, phi3;
};

struct SupportWindow {
    double lo, hi;
};

inline double heaviside(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? 0.0 : 0.5); }

// Mollified classical trajectory for the delta barrier. Point densities are
// widened by `space` (width dx); time spikes delta^(n)(v t) become
// time^(n)(t) / v^(n+1) with `time_moll` of width dx / v, so the counterterm
// identity f(-v t) = time(t) / v holds exactly.
//
// Reflected: bounce off the barrier, energy density (1/2) m v^2 rho.
// Transmitted: free passage plus barrier-window counterterms; all hierarchy
//              components keep compact support.
// NaiveTransmitted: free passage with the uncorrected barrier terms; phi^(2)
//              and phi^(3) carry non-decaying tails at crossing times.
struct TargetTrajectory {
    enum class Kind { Reflected, Transmitted, NaiveTransmitted };

    Kind kind = Kind::Reflected;
    double speed = 1.0;
    Mollifier space;      // packet shape, width dx
    Mollifier time_moll;  // width dx / v
    Mollifier g1, g2;     // counterterm shapes; default the packet shape
    PhysicalConstants constants;
    double barrier_strength = 1.0;

    using C = std::complex<double>;

    double g1_norm() const { return g1.eval(0.0, 4); }
    double g2_norm() const { return g2.eval(0.0, 4); }

    // time^(n)(t) / v^(n+1)
    double tfac(double t, int n) const {
        return time_moll.eval(t, n) / std::pow(speed, n + 1);
    }

    C phi(int order, double x, double t) const {
        const double m = constants.mass, hbar = constants.hbar, v = speed;
        const C iu(0.0, 1.0);
        const C step = std::pow(iu * m * v / hbar, order);
        switch (kind) {
            case Kind::Reflected: {
                const double a = space.eval(x - v * t) * heaviside(-t);
                const double b = space.eval(x + v * t) * heaviside(t);
                const double sign = (order % 2 == 0) ? 1.0 : -1.0;
                return step * (a + sign * b);
            }
            case Kind::Transmitted: {
                const double f = space.eval(x - v * t);
                const double s1 = (order % 2 == 0) ? -1.0 : 1.0;
                const double c1 = g1.eval(x, 4 - order) / g1_norm() * tfac(t, order);
                const double c2 = g2.eval(x, 3 - order) / g2_norm() * tfac(t, order + 1);
                return step * (f + s1 * c1 - s1 * c2);
            }
            case Kind::NaiveTransmitted: {
                const double f = space.eval(x - v * t);
                if (order <= 1) return step * f;
                const double v0 = barrier_strength;
                if (order == 2) {
                    const double free_part = -(m * m * v * v / (hbar * hbar)) * f;
                    const double spike = m * v0 / (hbar * hbar) *
                                         (space.eval(x) * tfac(t, 0) + heaviside(x) * tfac(t, 1));
                    return C(free_part + spike, 0.0);
                }
                // order == 3, from integrating the hierarchy in x.
                const double a = -(m * m * m * v * v * v / (hbar * hbar * hbar)) * f;
                const double bc = m * m * v * v0 / (hbar * hbar * hbar);
                const double tail = bc * (space.cumulative(x) * tfac(t, 1) +
                                          x * heaviside(x) * tfac(t, 2));
                const double cross = 2.0 * bc * overlap_integral(x, t);
                return C(0.0, a - tail + cross);
            }
        }
        throw std::logic_error("TargetTrajectory::phi: unreachable");
    }

    double rho(double x, double t) const { return phi(0, x, t).real(); }

    double mom(double x, double t) const {
        const C p1 = phi(1, x, t);
        return (C(0.0, -constants.hbar) * p1).real();
    }

    double en(double x, double t) const {
        const double m = constants.mass, hbar = constants.hbar, v = speed;
        if (kind == Kind::Reflected) return 0.5 * m * v * v * rho(x, t);
        const C p2 = phi(2, x, t);
        const double kinetic = -(hbar * hbar / (2.0 * m)) * p2.real();
        // Barrier spike smeared with the packet shape against the on-site value.
        const double onsite = phi(0, 0.0, t).real();
        return kinetic + barrier_strength * space.eval(x) * onsite;
    }

    // x-intervals where any component can be nonzero at time t. Unbounded
    // tails are clipped by the caller's domain.
    std::vector<SupportWindow> support(double t) const {
        const double v = speed;
        const double s = space.support_half_width();
        std::vector<SupportWindow> w;
        if (kind == Kind::Reflected) {
            const double c = -v * std::abs(t);
            w.push_back({c - s, c + s});
            return w;
        }
        w.push_back({v * t - s, v * t + s});
        if (std::abs(t) <= time_moll.support_half_width()) {
            const double sg = std::max(g1.support_half_width(), g2.support_half_width());
            if (kind == Kind::Transmitted) w.push_back({-sg, sg});
            else w.push_back({-sg, std::numeric_limits<double>::infinity()});
        }
        return w;
    }

    DensityTriple sample_densities(const Grid1D& x, const std::vector<double>& times) const {
        DensityTriple d;
        d.x = x;
        d.times = times;
        const int nt = static_cast<int>(times.size());
        d.rho.resize(nt, x.n);
        d.mom.resize(nt, x.n);
        d.en.resize(nt, x.n);
        for (int r = 0; r < nt; ++r)
            for (int i = 0; i < x.n; ++i) {
                const double xi = x.point(i);
                d.rho(r, i) = rho(xi, times[r]);
                d.mom(r, i) = mom(xi, times[r]);
                d.en(r, i) = en(xi, times[r]);
            }
        return d;
    }

    TrajectoryComponents sample_components(const Grid1D& x, const std::vector<double>& times) const {
        TrajectoryComponents c;
        c.x = x;
        c.times = times;
        const int nt = static_cast<int>(times.size());
        c.phi0.resize(nt, x.n);
        c.phi1.resize(nt, x.n);
        c.phi2.resize(nt, x.n);
        c.phi3.resize(nt, x.n);
        for (int r = 0; r < nt; ++r)
            for (int i = 0; i < x.n; ++i) {
                const double xi = x.point(i);
                c.phi0(r, i) = phi(0, xi, times[r]);
                c.phi1(r, i) = phi(1, xi, times[r]);
                c.phi2(r, i) = phi(2, xi, times[r]);
                c.phi3(r, i) = phi(3, xi, times[r]);
            }
        return c;
    }

private:
    // integral to x of space'(u) * space(u - v t) du; nonzero only while the
    // packet straddles the barrier.
    double overlap_integral(double x, double t) const {
        const double s = space.support_half_width();
        const double lo = std::max(-s, speed * t - s);
        const double hi = std::min({x, s, speed * t + s});
        if (hi <= lo) return 0.0;
        QuadratureRule rule{8, std::max(1, static_cast<int>(std::ceil((hi - lo) / (space.width / 4.0))))};
        return integrate(
            [&](double u) { return space.eval(u, 1) * space.eval(u - speed * t); }, lo, hi, rule);
    }
};

inline TargetTrajectory reflected_target(double v, double dx, PhysicalConstants c = {}) {
    if (!(v > 0.0)) throw std::invalid_argument("reflected_target: speed must be positive");
    TargetTrajectory t;
    t.kind = TargetTrajectory::Kind::Reflected;
    t.speed = v;
    t.space = Mollifier::cos4(dx);
    t.time_moll = Mollifier::cos4(dx / v);
    t.g1 = t.g2 = t.space;
    t.constants = c;
    return t;
}

inline TargetTrajectory transmitted_target(double v, double dx, PhysicalConstants c = {},
                                           double v0 = 1.0) {
    if (!(v > 0.0)) throw std::invalid_argument("transmitted_target: speed must be positive");
    TargetTrajectory t;
    t.kind = TargetTrajectory::Kind::Transmitted;
    t.speed = v;
    t.space = Mollifier::cos4(dx);
    t.time_moll = Mollifier::cos4(dx / v);
    t.g1 = t.g2 = t.space;
    t.constants = c;
    t.barrier_strength = v0;
    return t;
}

inline TargetTrajectory naive_transmitted_target(double v, double dx, PhysicalConstants c = {},
                                                 double v0 = 1.0) {
    TargetTrajectory t = transmitted_target(v, dx, c, v0);
    t.kind = TargetTrajectory::Kind::NaiveTransmitted;
    return t;
}

// ---------------------------------------------------------------------------
// Stationary scattering densities

enum class BarrierSide { Left, Right };

// Asymptotic pure-state densities for a stationary scattering state at
// wavenumber k. The left side carries an interference oscillation at
// wavenumber 2k; its complex coefficient is reported separately.
struct StationaryDensities {
    double k = 1.0;
    BarrierSide side = BarrierSide::Right;
    double rho_const = 0.0;
    double mom_const = 0.0;
    double en_const = 0.0;
    std::complex<double> osc_coeff; // rho(x) = rho_const + 2 Re(osc_coeff e^{2ikx})

    double rho(double x) const {
        return rho_const + 2.0 * (osc_coeff * std::exp(std::complex<double>(0.0, 2.0 * k * x))).real();
    }

    DensityTriple sample(const Grid1D& x) const {
        DensityTriple d;
        d.x = x;
        d.times = {0.0};
        d.rho.resize(1, x.n);
        d.mom.resize(1, x.n);
        d.en.resize(1, x.n);
        for (int i = 0; i < x.n; ++i) {
            d.rho(0, i) = rho(x.point(i));
            d.mom(0, i) = mom_const;
            d.en(0, i) = en_const;
        }
        return d;
    }
};

inline StationaryDensities stationary_pure_densities(double k, BarrierSide side,
                                                     PhysicalConstants c = {}, double v0 = 1.0,
                                                     std::complex<double> a0 = {1.0, 0.0}) {
    const auto amp = scattering_amplitudes(k, c.mass, c.hbar, v0, a0);
    const double hk = c.hbar * k;
    const double e1 = c.hbar * c.hbar * k * k / (2.0 * c.mass);
    StationaryDensities d;
    d.k = k;
    d.side = side;
    if (side == BarrierSide::Right) {
        const double t2 = std::norm(amp.transmitted);
        d.rho_const = t2;
        d.mom_const = t2 * hk;
        d.en_const = t2 * e1;
    } else {
        const double a2 = std::norm(a0);
        const double r2 = std::norm(amp.reflected);
        d.rho_const = a2 + r2;
        d.mom_const = (a2 - r2) * hk;
        d.en_const = (a2 + r2) * e1;
        d.osc_coeff = a0 * std::conj(amp.reflected);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Incoherent mixture of time-translated trajectories

// Integrates |A_R|^2 rho_R(x, t - t0) + |A_T|^2 rho_T(x, t - t0) (and the
// momentum/energy analogues) over the release time t0. Reproduces the
// stationary side densities without the interference oscillation. The result
// is time independent, so the evaluator carries no time argument.
struct MixtureEvaluator {
    double k = 1.0;
    double speed = 1.0;
    double weight_reflected = 0.0;
    double weight_transmitted = 0.0;
    TargetTrajectory reflected, transmitted;

    double left_rho() const { return 1.0 + weight_reflected; }
    double left_mom() const {
        return weight_transmitted * reflected.constants.mass * speed;
    }
    double left_en() const {
        return left_rho() * 0.5 * reflected.constants.mass * speed * speed;
    }
    double right_rho() const { return weight_transmitted; }
    double right_mom() const { return right_rho() * reflected.constants.mass * speed; }
    double right_en() const {
        return right_rho() * 0.5 * reflected.constants.mass * speed * speed;
    }

    double rho(double x) const { return accumulate(x, 0); }
    double mom(double x) const { return accumulate(x, 1); }
    double en(double x) const { return accumulate(x, 2); }

  private:
    double accumulate(double xi, int channel) const {
        const double v = speed;
        const double s = reflected.space.support_half_width();
        const double st = transmitted.time_moll.support_half_width();
        // tau = t - t0; branch windows in tau for this field point, merged to
        // a disjoint cover so the quadrature counts each region once.
        std::vector<SupportWindow> windows = {{(xi - s) / v, (xi + s) / v},
                                              {(-xi - s) / v, (-xi + s) / v},
                                              {-st, st}};
        std::sort(windows.begin(), windows.end(),
                  [](const SupportWindow& a, const SupportWindow& b) { return a.lo < b.lo; });
        std::vector<SupportWindow> merged;
        for (const auto& w : windows) {
            if (!merged.empty() && w.lo <= merged.back().hi)
                merged.back().hi = std::max(merged.back().hi, w.hi);
            else
                merged.push_back(w);
        }
        const double dx = reflected.space.width;
        double acc = 0.0;
        for (const auto& w : merged) {
            const int panels =
                std::max(2, static_cast<int>(std::ceil((w.hi - w.lo) / (dx / (6.0 * v)))));
            std::vector<double> ts, ws;
            gauss_nodes(w.lo, w.hi, QuadratureRule{8, panels}, ts, ws);
            for (size_t q = 0; q < ts.size(); ++q) {
                const double tau = ts[q];
                double fr = 0.0, ft = 0.0;
                switch (channel) {
                    case 0: fr = reflected.rho(xi, tau); ft = transmitted.rho(xi, tau); break;
                    case 1: fr = reflected.mom(xi, tau); ft = transmitted.mom(xi, tau); break;
                    default: fr = reflected.en(xi, tau); ft = transmitted.en(xi, tau); break;
                }
                acc += ws[q] * (weight_reflected * fr + weight_transmitted * ft) * v;
            }
        }
        return acc;
    }
};

inline MixtureEvaluator make_mixture(double k, double dx, PhysicalConstants c = {},
                                     double v0 = 1.0) {
    if (!(k > 0.0)) throw std::invalid_argument("make_mixture: k must be positive");
    MixtureEvaluator m;
    m.k = k;
    m.speed = c.hbar * k / c.mass;
    const auto amp = scattering_amplitudes(k, c.mass, c.hbar, v0);
    m.weight_reflected = std::norm(amp.reflected);
    m.weight_transmitted = std::norm(amp.transmitted);
    m.reflected = reflected_target(m.speed, dx, c);
    m.transmitted = transmitted_target(m.speed, dx, c, v0);
    return m;
}

inline DensityTriple mixture_density(double k, double dx, const Grid1D& x,
                                     const std::vector<double>& times,
                                     PhysicalConstants c = {}, double v0 = 1.0) {
    const MixtureEvaluator m = make_mixture(k, dx, c, v0);
    DensityTriple d;
    d.x = x;
    d.times = times;
    const int nt = static_cast<int>(times.size());
    d.rho.setZero(nt, x.n);
    d.mom.setZero(nt, x.n);
    d.en.setZero(nt, x.n);
    for (int i = 0; i < x.n; ++i) {
        const double rho = m.rho(x.point(i));
        const double mom = m.mom(x.point(i));
        const double en = m.en(x.point(i));
        for (int r = 0; r < nt; ++r) {
            d.rho(r, i) = rho;
            d.mom(r, i) = mom;
            d.en(r, i) = en;
        }
    }
    return d;
}

} // namespace qmat
