#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "qmat/fields.hpp"
#include "qmat/grid.hpp"

namespace qmat {

// ---------------------------------------------------------------------------
// Two-particle diagonal data
//
// For a two-particle matrix trajectory only the diagonal slice and the two
// first-derivative slices (one per relative coordinate, evaluated on the
// diagonal) are retained: that is exactly the data entering the particle
// densities, flow densities, and the separability analysis.

struct TwoParticleMasses {
    double m1 = 1.0;
    double m2 = 2.0;

    void validate() const {
        if (!(m1 > 0.0) || !(m2 > 0.0))
            throw std::invalid_argument("TwoParticleMasses: masses must be positive");
        if (std::abs(m1 - m2) < 1e-12 * std::max(m1, m2))
            throw std::invalid_argument(
                "TwoParticleMasses: distinguishable constituents require distinct masses");
    }
};

struct TwoParticleField {
    Grid1D x1, x2;
    std::vector<double> times;
    TwoParticleMasses masses;
    double hbar = 1.0;
    // rows index x1, columns index x2; one matrix per time sample
    std::vector<Eigen::MatrixXd> diag;
    std::vector<Eigen::MatrixXcd> slice1, slice2;

    void validate() const {
        masses.validate();
        if (diag.size() != times.size() || slice1.size() != times.size() ||
            slice2.size() != times.size())
            throw std::invalid_argument("TwoParticleField: per-time slice counts disagree");
        for (size_t r = 0; r < times.size(); ++r) {
            if (diag[r].rows() != x1.n || diag[r].cols() != x2.n ||
                slice1[r].rows() != x1.n || slice1[r].cols() != x2.n ||
                slice2[r].rows() != x1.n || slice2[r].cols() != x2.n)
                throw std::invalid_argument("TwoParticleField: slice shape does not match grids");
        }
    }
};

// A single-particle pure state given by closed forms for psi and its spatial
// derivative.
struct WavePacket {
    std::function<std::complex<double>(double, double)> psi;  // psi(x, t)
    std::function<std::complex<double>(double, double)> dpsi; // d psi / dx
};

// Product state Psi(x1, x2) = a(x1) b(x2).
inline TwoParticleField product_two_particle(const WavePacket& a, const WavePacket& b,
                                             const Grid1D& x1, const Grid1D& x2,
                                             const std::vector<double>& times,
                                             TwoParticleMasses masses, double hbar = 1.0) {
    masses.validate();
    TwoParticleField f;
    f.x1 = x1;
    f.x2 = x2;
    f.times = times;
    f.masses = masses;
    f.hbar = hbar;
    for (double t : times) {
        Eigen::VectorXcd va(x1.n), da(x1.n), vb(x2.n), db(x2.n);
        for (int q = 0; q < x1.n; ++q) {
            va[q] = a.psi(x1.point(q), t);
            da[q] = a.dpsi(x1.point(q), t);
        }
        for (int q = 0; q < x2.n; ++q) {
            vb[q] = b.psi(x2.point(q), t);
            db[q] = b.dpsi(x2.point(q), t);
        }
        const Eigen::VectorXd pa = va.cwiseAbs2();
        const Eigen::VectorXd pb = vb.cwiseAbs2();
        // (1/2)(psi' psi* - psi psi*') on the diagonal of each coordinate
        Eigen::VectorXcd ja(x1.n), jb(x2.n);
        for (int q = 0; q < x1.n; ++q) ja[q] = 0.5 * (da[q] * std::conj(va[q]) - va[q] * std::conj(da[q]));
        for (int q = 0; q < x2.n; ++q) jb[q] = 0.5 * (db[q] * std::conj(vb[q]) - vb[q] * std::conj(db[q]));
        f.diag.push_back(pa * pb.transpose());
        f.slice1.push_back(ja * pb.transpose().cast<std::complex<double>>());
        f.slice2.push_back(pa.cast<std::complex<double>>() * jb.transpose());
    }
    f.validate();
    return f;
}

// General pure state Psi(x1, x2, t) with both partial derivatives supplied.
inline TwoParticleField two_particle_from_pure(
    const std::function<std::complex<double>(double, double, double)>& psi,
    const std::function<std::complex<double>(double, double, double)>& d1psi,
    const std::function<std::complex<double>(double, double, double)>& d2psi, const Grid1D& x1,
    const Grid1D& x2, const std::vector<double>& times, TwoParticleMasses masses,
    double hbar = 1.0) {
    masses.validate();
    TwoParticleField f;
    f.x1 = x1;
    f.x2 = x2;
    f.times = times;
    f.masses = masses;
    f.hbar = hbar;
    for (double t : times) {
        Eigen::MatrixXd d(x1.n, x2.n);
        Eigen::MatrixXcd s1(x1.n, x2.n), s2(x1.n, x2.n);
        for (int q1 = 0; q1 < x1.n; ++q1)
            for (int q2 = 0; q2 < x2.n; ++q2) {
                const std::complex<double> v = psi(x1.point(q1), x2.point(q2), t);
                const std::complex<double> g1 = d1psi(x1.point(q1), x2.point(q2), t);
                const std::complex<double> g2 = d2psi(x1.point(q1), x2.point(q2), t);
                d(q1, q2) = std::norm(v);
                s1(q1, q2) = 0.5 * (g1 * std::conj(v) - v * std::conj(g1));
                s2(q1, q2) = 0.5 * (g2 * std::conj(v) - v * std::conj(g2));
            }
        f.diag.push_back(std::move(d));
        f.slice1.push_back(std::move(s1));
        f.slice2.push_back(std::move(s2));
    }
    f.validate();
    return f;
}

// ---------------------------------------------------------------------------
// Separability analysis

struct SeparabilityReport {
    double r0 = 0.0; // rank-one residual of the diagonal slice (Frobenius, relative)
    double r1 = 0.0; // residual of slice1 against the rank-one column factor
    double r2 = 0.0; // residual of slice2 against the rank-one row factor
    Eigen::VectorXd factor1, factor2; // leading factors of the diagonal slice
    double sigma1 = 0.0;
};

inline SeparabilityReport separability_residual(const TwoParticleField& f, int time_index) {
    if (time_index < 0 || time_index >= static_cast<int>(f.times.size()))
        throw std::out_of_range("separability_residual: time index");
    const Eigen::MatrixXd& d = f.diag[time_index];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    SeparabilityReport rep;
    rep.sigma1 = sv[0];
    double tail = 0.0;
    for (int k = 1; k < sv.size(); ++k) tail += sv[k] * sv[k];
    rep.r0 = sv[0] > 0.0 ? std::sqrt(tail) / sv[0] : 0.0;
    rep.factor1 = svd.matrixU().col(0) * sv[0];
    rep.factor2 = svd.matrixV().col(0);
    // fix the sign so the mass factors are nonnegative for ordinary states
    if (rep.factor1.sum() < 0.0) {
        rep.factor1 = -rep.factor1;
        rep.factor2 = -rep.factor2;
    }

    auto fit_residual = [](const Eigen::MatrixXcd& s, const Eigen::VectorXd& fixed,
                           bool fixed_is_partner_profile) {
        // least-squares factor against the fixed singular vector
        const double denom = fixed.squaredNorm();
        Eigen::MatrixXcd model(s.rows(), s.cols());
        if (fixed_is_partner_profile) {
            const Eigen::VectorXcd coef = s * fixed.cast<std::complex<double>>() / denom;
            model = coef * fixed.transpose().cast<std::complex<double>>();
        } else {
            const Eigen::RowVectorXcd coef =
                fixed.transpose().cast<std::complex<double>>() * s / denom;
            model = fixed.cast<std::complex<double>>() * coef;
        }
        const double norm = s.norm();
        return norm > 0.0 ? (s - model).norm() / norm : 0.0;
    };
    // slice1 should factor as j1(x1) rho2(x2): the x2 profile matches factor2
    rep.r1 = fit_residual(f.slice1[time_index], rep.factor2, true);
    // slice2 should factor as rho1(x1) j2(x2): the x1 profile matches factor1
    rep.r2 = fit_residual(f.slice2[time_index], rep.factor1 / std::max(rep.factor1.norm(), 1e-300),
                          false);
    return rep;
}

// ---------------------------------------------------------------------------
// Observables of the pair

struct TwoParticleObservables {
    double mass = 0.0;
    double q1 = 0.0, q2 = 0.0;
    double p1 = 0.0, p2 = 0.0;
    double q_total = 0.0, p_total = 0.0;
};

namespace detail {

inline double trapezoid_weight(int q, int n) { return (q == 0 || q == n - 1) ? 0.5 : 1.0; }

} // namespace detail

inline TwoParticleObservables two_particle_observables(const TwoParticleField& f,
                                                       int time_index) {
    if (time_index < 0 || time_index >= static_cast<int>(f.times.size()))
        throw std::out_of_range("two_particle_observables: time index");
    const Eigen::MatrixXd& d = f.diag[time_index];
    const Eigen::MatrixXcd& s1 = f.slice1[time_index];
    const Eigen::MatrixXcd& s2 = f.slice2[time_index];
    const double h1 = f.x1.spacing(), h2 = f.x2.spacing();
    TwoParticleObservables out;
    for (int q1 = 0; q1 < f.x1.n; ++q1) {
        const double w1 = detail::trapezoid_weight(q1, f.x1.n) * h1;
        for (int q2 = 0; q2 < f.x2.n; ++q2) {
            const double w = w1 * detail::trapezoid_weight(q2, f.x2.n) * h2;
            out.mass += w * d(q1, q2);
            out.q1 += w * f.x1.point(q1) * d(q1, q2);
            out.q2 += w * f.x2.point(q2) * d(q1, q2);
            // flow density is -i hbar times the derivative slice
            out.p1 += w * (std::complex<double>(0.0, -f.hbar) * s1(q1, q2)).real();
            out.p2 += w * (std::complex<double>(0.0, -f.hbar) * s2(q1, q2)).real();
        }
    }
    if (out.mass > 0.0) {
        out.q1 /= out.mass;
        out.q2 /= out.mass;
    }
    out.q_total = out.q1 + out.q2;
    out.p_total = out.p1 + out.p2;
    return out;
}

// ---------------------------------------------------------------------------
// Reduced continuity: each particle's flow density and number density obey
//   d P_i / d x_i = -m_i d rho_i / d t
// after tracing out the partner coordinate, whatever the partner does.

struct ContinuityResiduals {
    double particle1 = 0.0;
    double particle2 = 0.0;
};

inline ContinuityResiduals check_decoupled_continuity(const TwoParticleField& f) {
    const int nt = static_cast<int>(f.times.size());
    if (nt < 3) throw std::invalid_argument("check_decoupled_continuity: need >= 3 time samples");
    const double dt = f.times[1] - f.times[0];
    for (int r = 1; r + 1 < nt; ++r)
        if (std::abs((f.times[r + 1] - f.times[r]) - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw std::invalid_argument("check_decoupled_continuity: time samples must be uniform");

    // reduced densities: rho_1(x1) = integral over x2 of diag, etc.
    const double h1 = f.x1.spacing(), h2 = f.x2.spacing();
    auto reduce_rows = [&](const Eigen::MatrixXd& m) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(m.rows());
        for (int c = 0; c < m.cols(); ++c)
            v += detail::trapezoid_weight(c, static_cast<int>(m.cols())) * h2 * m.col(c);
        return v;
    };
    auto reduce_cols = [&](const Eigen::MatrixXd& m) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(m.cols());
        for (int r = 0; r < m.rows(); ++r)
            v += detail::trapezoid_weight(r, static_cast<int>(m.rows())) * h1 * m.row(r).transpose();
        return v;
    };

    std::vector<Eigen::VectorXd> rho1(nt), rho2(nt), flow1(nt), flow2(nt);
    for (int r = 0; r < nt; ++r) {
        rho1[r] = reduce_rows(f.diag[r]);
        rho2[r] = reduce_cols(f.diag[r]);
        const Eigen::MatrixXd j1 =
            (std::complex<double>(0.0, -f.hbar) * f.slice1[r]).real();
        const Eigen::MatrixXd j2 =
            (std::complex<double>(0.0, -f.hbar) * f.slice2[r]).real();
        flow1[r] = reduce_rows(j1);
        flow2[r] = reduce_cols(j2);
    }

    auto residual = [&](const std::vector<Eigen::VectorXd>& rho,
                        const std::vector<Eigen::VectorXd>& flow, const Grid1D& g, double mass) {
        const double h = g.spacing();
        double worst = 0.0, scale = 0.0;
        for (int r = 1; r + 1 < nt; ++r)
            for (int q = 1; q + 1 < g.n; ++q) {
                const double dflow = (flow[r][q + 1] - flow[r][q - 1]) / (2.0 * h);
                const double drho = (rho[r + 1][q] - rho[r - 1][q]) / (2.0 * dt);
                worst = std::max(worst, std::abs(dflow + mass * drho));
                scale = std::max({scale, std::abs(dflow), std::abs(mass * drho)});
            }
        return scale > 0.0 ? worst / scale : 0.0;
    };

    ContinuityResiduals out;
    out.particle1 = residual(rho1, flow1, f.x1, f.masses.m1);
    out.particle2 = residual(rho2, flow2, f.x2, f.masses.m2);
    return out;
}

} // namespace qmat
