#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qmat/basis.hpp"
#include "qmat/grid.hpp"
#include "qmat/linalg.hpp"
#include "qmat/quadrature.hpp"
#include "qmat/targets.hpp"

namespace qmat {

// ---------------------------------------------------------------------------
// Scalar product specification
//
// <a, b> = integral over [-L, L] x [-T, T] of
//          (w0 rho_a* rho_b + w1 mom_a* mom_b + w2 en_a* en_b) * p(x, t)
// with p = 1, or the barrier-window mask
// p(x, t) = 1 - theta(a - |x|) theta(b - |t|) when enabled.

struct ScalarProductSpec {
    double w0 = 1.0, w1 = 1.0, w2 = 1.0;
    double half_time = 1.0; // T
    bool mask = false;
    double mask_half_width = 0.0; // a
    double mask_half_time = 0.0;  // b

    void validate() const {
        if (!(half_time > 0.0)) throw std::invalid_argument("ScalarProductSpec: T must be positive");
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0 || (w0 == 0.0 && w1 == 0.0 && w2 == 0.0))
            throw std::invalid_argument("ScalarProductSpec: weights must be nonnegative, not all zero");
        if (mask && (!(mask_half_width > 0.0) || !(mask_half_time > 0.0)))
            throw std::invalid_argument("ScalarProductSpec: mask window must be positive");
    }

    // Weights scaled so the three channels are dimensionally comparable for a
    // packet of speed v; mask sized to the barrier crossing window.
    static ScalarProductSpec for_flow(double mass, double v, double dx, double half_time,
                                      bool masked) {
        ScalarProductSpec s;
        // Channels are normalized by their bulk scales (1, m v, m v^2 / 2).
        // The flow channel gets an extra factor: its net integral is the
        // plateau observable, and a least-squares fit at equal weights trades
        // it away for marginal density gains, leaving the reconstructed
        // packet short of momentum.
        s.w0 = 1.0;
        s.w1 = 100.0 / (mass * v * mass * v);
        s.w2 = 1.0 / (0.5 * mass * v * v * 0.5 * mass * v * v);
        s.half_time = half_time;
        s.mask = masked;
        s.mask_half_width = M_PI * dx;
        s.mask_half_time = 0.5 * M_PI * dx / v;
        return s;
    }
};

// Quadrature panel bound resolving both the packet shape and the fastest
// basis oscillation.
inline double projection_panel_bound(double dx, double k_max) {
    return std::min(dx / 6.0, M_PI / (3.0 * k_max));
}

// ---------------------------------------------------------------------------
// Real Hermitian-pair parametrization
//
// Basis elements over mode pairs: diagonal pairs phi_ii, then for i < j the
// combinations (phi_ij + phi_ji) and i (phi_ij - phi_ji). All carry real
// densities. Layout: [diag 0..N] ++ [sym(i,j), asym(i,j)] lexicographic.

enum class PairElementType { Diag, Sym, Asym };

struct PairElement {
    PairElementType type;
    int i, j; // i == j for Diag, i < j otherwise
};

inline int pair_basis_dim(int n_modes) { return n_modes * n_modes; }

inline int pair_element_index(int n_modes, const PairElement& e) {
    if (e.type == PairElementType::Diag) return e.i;
    const int rank = e.i * n_modes - e.i * (e.i + 1) / 2 + (e.j - e.i - 1);
    return n_modes + 2 * rank + (e.type == PairElementType::Asym ? 1 : 0);
}

inline PairElement pair_element_at(int n_modes, int index) {
    if (index < 0 || index >= pair_basis_dim(n_modes))
        throw std::out_of_range("pair_element_at: index outside basis");
    if (index < n_modes) return {PairElementType::Diag, index, index};
    int rank = (index - n_modes) / 2;
    const bool asym = ((index - n_modes) % 2) == 1;
    int i = 0;
    while (rank >= n_modes - i - 1) {
        rank -= n_modes - i - 1;
        ++i;
    }
    const int j = i + 1 + rank;
    return {asym ? PairElementType::Asym : PairElementType::Sym, i, j};
}

// Hermitian coefficient matrix stored through its real parametrization.
struct CoefficientMatrix {
    int n_modes = 0;
    Eigen::VectorXd coeffs; // pair_basis_dim entries, alpha layout

    Eigen::MatrixXcd to_matrix() const {
        Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(n_modes, n_modes);
        for (int idx = 0; idx < coeffs.size(); ++idx) {
            const PairElement e = pair_element_at(n_modes, idx);
            if (e.type == PairElementType::Diag) {
                c(e.i, e.i) += coeffs[idx];
            } else if (e.type == PairElementType::Sym) {
                c(e.i, e.j) += coeffs[idx];
                c(e.j, e.i) += coeffs[idx];
            } else {
                c(e.i, e.j) += std::complex<double>(0.0, coeffs[idx]);
                c(e.j, e.i) += std::complex<double>(0.0, -coeffs[idx]);
            }
        }
        return c;
    }

    static CoefficientMatrix from_matrix(const Eigen::MatrixXcd& c, double tol = 1e-10) {
        if (c.rows() != c.cols()) throw std::invalid_argument("CoefficientMatrix: matrix not square");
        const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
        if ((c - c.adjoint()).cwiseAbs().maxCoeff() > tol * scale)
            throw std::invalid_argument("CoefficientMatrix: matrix is not Hermitian");
        CoefficientMatrix r;
        r.n_modes = static_cast<int>(c.rows());
        r.coeffs.resize(pair_basis_dim(r.n_modes));
        for (int idx = 0; idx < r.coeffs.size(); ++idx) {
            const PairElement e = pair_element_at(r.n_modes, idx);
            if (e.type == PairElementType::Diag) r.coeffs[idx] = c(e.i, e.i).real();
            else if (e.type == PairElementType::Sym) r.coeffs[idx] = c(e.i, e.j).real();
            else r.coeffs[idx] = c(e.i, e.j).imag();
        }
        return r;
    }
};

// ---------------------------------------------------------------------------
// Pair densities (complex, single ordered pair)

struct PairDensity {
    ModeSolution mi, mj;
    double omega; // omega_j - omega_i

    std::complex<double> phase(double t) const {
        return std::exp(std::complex<double>(0.0, omega * t));
    }
    std::complex<double> rho(double x, double t) const {
        return eval_mode(mi, x) * eval_mode(mj, x) * phase(t);
    }
    std::complex<double> mom(double x, double t) const {
        const double d = eval_mode_prime(mi, x) * eval_mode(mj, x) -
                         eval_mode(mi, x) * eval_mode_prime(mj, x);
        return std::complex<double>(0.0, -0.5) * d * phase(t);
    }
    std::complex<double> en(double x, double t) const {
        const double c = 0.25 * (mi.k * mi.k + mj.k * mj.k);
        return c * eval_mode(mi, x) * eval_mode(mj, x) * phase(t);
    }
};

inline PairDensity pair_densities(const BasisSet& basis, int i, int j) {
    if (i < 0 || j < 0 || i >= basis.size() || j >= basis.size())
        throw std::out_of_range("pair_densities: mode index outside basis");
    PairDensity p;
    p.mi = basis.modes[i];
    p.mj = basis.modes[j];
    p.omega = basis.modes[j].omega - basis.modes[i].omega;
    return p;
}

// ---------------------------------------------------------------------------
// Analytic Gram assembly

namespace detail {

// amp * cos(freq * x + phase) on the half-line form x in (0, L].
struct CosTerm {
    double freq, phase, amp;
};
using TrigPoly = std::vector<CosTerm>;

inline TrigPoly mode_poly(const ModeSolution& m) {
    if (m.parity > 0) return {{m.k, -m.phi, m.amplitude}};
    return {{m.k, -0.5 * M_PI, m.amplitude}};
}

inline TrigPoly mode_prime_poly(const ModeSolution& m) {
    TrigPoly p = mode_poly(m);
    for (auto& t : p) {
        t.amp *= t.freq;
        t.phase += 0.5 * M_PI;
    }
    return p;
}

inline TrigPoly tp_product(const TrigPoly& a, const TrigPoly& b) {
    TrigPoly out;
    out.reserve(2 * a.size() * b.size());
    for (const auto& ta : a)
        for (const auto& tb : b) {
            const double amp = 0.5 * ta.amp * tb.amp;
            out.push_back({ta.freq - tb.freq, ta.phase - tb.phase, amp});
            out.push_back({ta.freq + tb.freq, ta.phase + tb.phase, amp});
        }
    return out;
}

inline TrigPoly tp_sub(TrigPoly a, const TrigPoly& b) {
    for (const auto& t : b) a.push_back({t.freq, t.phase, -t.amp});
    return a;
}

inline double tp_integral(const TrigPoly& p, double upper) {
    double acc = 0.0;
    for (const auto& t : p) {
        if (std::abs(t.freq) * upper < 1e-12)
            acc += t.amp * std::cos(t.phase) * upper;
        else
            acc += t.amp * (std::sin(t.freq * upper + t.phase) - std::sin(t.phase)) / t.freq;
    }
    return acc;
}

// integral of cos(w t) over [-T, T]
inline double cos_window(double w, double T) {
    const double arg = w * T;
    if (std::abs(arg) < 1e-8) return 2.0 * T * (1.0 - arg * arg / 6.0);
    return 2.0 * std::sin(arg) / w;
}

enum class TimeKind { Zero, Const, Cos, Sin };

struct ChannelFactor {
    double coef = 0.0;
    TimeKind kind = TimeKind::Zero;
    double omega = 0.0;
};

inline double time_integral(const ChannelFactor& a, const ChannelFactor& b, double T) {
    if (a.kind == TimeKind::Zero || b.kind == TimeKind::Zero) return 0.0;
    const bool a_sin = a.kind == TimeKind::Sin;
    const bool b_sin = b.kind == TimeKind::Sin;
    if (a_sin != b_sin) return 0.0; // odd integrand over symmetric window
    if (a.kind == TimeKind::Const && b.kind == TimeKind::Const) return 2.0 * T;
    if (a.kind == TimeKind::Const) return cos_window(b.omega, T);
    if (b.kind == TimeKind::Const) return cos_window(a.omega, T);
    const double diff = cos_window(a.omega - b.omega, T);
    const double sum = cos_window(a.omega + b.omega, T);
    return a_sin ? 0.5 * (diff - sum) : 0.5 * (diff + sum);
}

struct ElementShapes {
    TrigPoly u;      // f_i f_j on the half-line
    TrigPoly d;      // f_i' f_j - f_i f_j'
    int parity;      // product parity under x -> -x
    ChannelFactor rho, mom, en;
};

inline ElementShapes element_shapes(const BasisSet& basis, const PairElement& e) {
    const ModeSolution& mi = basis.modes[e.i];
    const ModeSolution& mj = basis.modes[e.j];
    ElementShapes s;
    s.u = tp_product(mode_poly(mi), mode_poly(mj));
    s.d = tp_sub(tp_product(mode_prime_poly(mi), mode_poly(mj)),
                 tp_product(mode_poly(mi), mode_prime_poly(mj)));
    s.parity = mi.parity * mj.parity;
    const double omega = mj.omega - mi.omega;
    const double c_en = 0.25 * (mi.k * mi.k + mj.k * mj.k);
    switch (e.type) {
        case PairElementType::Diag:
            s.rho = {1.0, TimeKind::Const, 0.0};
            s.mom = {0.0, TimeKind::Zero, 0.0};
            s.en = {c_en, TimeKind::Const, 0.0};
            break;
        case PairElementType::Sym:
            s.rho = {2.0, TimeKind::Cos, omega};
            s.mom = {1.0, TimeKind::Sin, omega};
            s.en = {2.0 * c_en, TimeKind::Cos, omega};
            break;
        case PairElementType::Asym:
            s.rho = {-2.0, TimeKind::Sin, omega};
            s.mom = {1.0, TimeKind::Cos, omega};
            s.en = {-2.0 * c_en, TimeKind::Sin, omega};
            break;
    }
    return s;
}

} // namespace detail

// Closed-form scalar product between two real-parametrization elements.
inline double gram_entry(const BasisSet& basis, int alpha, int beta,
                         const ScalarProductSpec& spec) {
    const int n = basis.size();
    const detail::ElementShapes a = detail::element_shapes(basis, pair_element_at(n, alpha));
    const detail::ElementShapes b = detail::element_shapes(basis, pair_element_at(n, beta));
    if (a.parity * b.parity < 0) return 0.0; // odd space integrand

    const double L = basis.box_half_width;
    const detail::TrigPoly uu = detail::tp_product(a.u, b.u);
    const detail::TrigPoly dd = detail::tp_product(a.d, b.d);

    auto block = [&](double T, double X) {
        const double s_u = 2.0 * detail::tp_integral(uu, X);
        const double s_d = 2.0 * detail::tp_integral(dd, X);
        double acc = 0.0;
        acc += spec.w0 * a.rho.coef * b.rho.coef * detail::time_integral(a.rho, b.rho, T) * s_u;
        acc += spec.w1 * a.mom.coef * b.mom.coef * detail::time_integral(a.mom, b.mom, T) * s_d;
        acc += spec.w2 * a.en.coef * b.en.coef * detail::time_integral(a.en, b.en, T) * s_u;
        return acc;
    };

    double value = block(spec.half_time, L);
    if (spec.mask) {
        const double X = std::min(spec.mask_half_width, L);
        const double T = std::min(spec.mask_half_time, spec.half_time);
        value -= block(T, X);
    }
    return value;
}

inline Eigen::MatrixXd assemble_gram(const BasisSet& basis, const ScalarProductSpec& spec) {
    spec.validate();
    const int dim = pair_basis_dim(basis.size());
    Eigen::MatrixXd g(dim, dim);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int r = 0; r < dim; ++r)
        for (int c = r; c < dim; ++c) g(r, c) = gram_entry(basis, r, c, spec);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < r; ++c) g(r, c) = g(c, r);
    return g;
}

// ---------------------------------------------------------------------------
// Generic scalar product by panel quadrature (real density functions)

struct DensityFunctions {
    std::function<double(double, double)> rho, mom, en;
    // Optional x-support windows at time t; infinite bounds are clipped.
    std::function<std::vector<SupportWindow>(double)> support;
};

namespace detail {

inline std::vector<SupportWindow> clip_windows(std::vector<SupportWindow> w, double lo, double hi) {
    std::vector<SupportWindow> out;
    for (auto& s : w) {
        const double a = std::max(s.lo, lo);
        const double b = std::min(s.hi, hi);
        if (b > a) out.push_back({a, b});
    }
    std::sort(out.begin(), out.end(),
              [](const SupportWindow& x, const SupportWindow& y) { return x.lo < y.lo; });
    std::vector<SupportWindow> merged;
    for (const auto& s : out) {
        if (!merged.empty() && s.lo <= merged.back().hi)
            merged.back().hi = std::max(merged.back().hi, s.hi);
        else
            merged.push_back(s);
    }
    return merged;
}

// Split any window containing the cut point, so that an integration panel
// never straddles it. The cosine modes have a derivative kink at the barrier,
// and Gauss panels lose their accuracy across a corner.
inline std::vector<SupportWindow> split_at(const std::vector<SupportWindow>& w, double cut) {
    std::vector<SupportWindow> out;
    for (const auto& s : w) {
        if (s.lo < cut && cut < s.hi) {
            out.push_back({s.lo, cut});
            out.push_back({cut, s.hi});
        } else {
            out.push_back(s);
        }
    }
    return out;
}

inline std::vector<SupportWindow> subtract_interval(const std::vector<SupportWindow>& w, double lo,
                                                    double hi) {
    std::vector<SupportWindow> out;
    for (const auto& s : w) {
        if (s.hi <= lo || s.lo >= hi) {
            out.push_back(s);
            continue;
        }
        if (s.lo < lo) out.push_back({s.lo, lo});
        if (s.hi > hi) out.push_back({hi, s.hi});
    }
    return out;
}

inline void panel_nodes(const std::vector<SupportWindow>& windows, double panel_max,
                        std::vector<double>& xs, std::vector<double>& ws) {
    xs.clear();
    ws.clear();
    std::vector<double> px, pw;
    for (const auto& w : windows) {
        const int panels = std::max(1, static_cast<int>(std::ceil((w.hi - w.lo) / panel_max)));
        gauss_nodes(w.lo, w.hi, QuadratureRule{8, panels}, px, pw);
        xs.insert(xs.end(), px.begin(), px.end());
        ws.insert(ws.end(), pw.begin(), pw.end());
    }
}

// Time panels over [-T, T], split at the mask edges so no panel straddles a
// weight discontinuity.
inline void time_nodes(const ScalarProductSpec& spec, double panel_max, std::vector<double>& ts,
                       std::vector<double>& ws) {
    std::vector<double> edges = {-spec.half_time, spec.half_time};
    if (spec.mask && spec.mask_half_time < spec.half_time) {
        edges.insert(edges.end() - 1, -spec.mask_half_time);
        edges.insert(edges.end() - 1, spec.mask_half_time);
    }
    ts.clear();
    ws.clear();
    std::vector<double> px, pw;
    for (size_t s = 0; s + 1 < edges.size(); ++s) {
        const int panels =
            std::max(1, static_cast<int>(std::ceil((edges[s + 1] - edges[s]) / panel_max)));
        gauss_nodes(edges[s], edges[s + 1], QuadratureRule{8, panels}, px, pw);
        ts.insert(ts.end(), px.begin(), px.end());
        ws.insert(ws.end(), pw.begin(), pw.end());
    }
}

} // namespace detail

inline double scalar_product(const DensityFunctions& a, const DensityFunctions& b,
                             const ScalarProductSpec& spec, double box_half_width,
                             double panel_max) {
    spec.validate();
    const auto& support = a.support ? a.support : b.support;
    std::vector<double> ts, tw, xs, xw;
    detail::time_nodes(spec, panel_max, ts, tw);
    double acc = 0.0;
    for (size_t r = 0; r < ts.size(); ++r) {
        const double t = ts[r];
        std::vector<SupportWindow> win =
            support ? support(t) : std::vector<SupportWindow>{{-box_half_width, box_half_width}};
        win = detail::clip_windows(std::move(win), -box_half_width, box_half_width);
        if (spec.mask && std::abs(t) < spec.mask_half_time)
            win = detail::subtract_interval(win, -spec.mask_half_width, spec.mask_half_width);
        win = detail::split_at(win, 0.0);
        detail::panel_nodes(win, panel_max, xs, xw);
        double inner = 0.0;
        for (size_t q = 0; q < xs.size(); ++q) {
            const double x = xs[q];
            inner += xw[q] * (spec.w0 * a.rho(x, t) * b.rho(x, t) +
                              spec.w1 * a.mom(x, t) * b.mom(x, t) +
                              spec.w2 * a.en(x, t) * b.en(x, t));
        }
        acc += tw[r] * inner;
    }
    return acc;
}

inline DensityFunctions target_functions(const TargetTrajectory& target) {
    DensityFunctions f;
    f.rho = [target](double x, double t) { return target.rho(x, t); };
    f.mom = [target](double x, double t) { return target.mom(x, t); };
    f.en = [target](double x, double t) { return target.en(x, t); };
    f.support = [target](double t) { return target.support(t); };
    return f;
}

// ---------------------------------------------------------------------------
// Target projection

struct ProjectionOptions {
    double panel_max = 0.0; // 0: derive from basis and target widths
    double ridge = -1.0;    // negative: default_ridge(G)
};

struct ProjectionResult {
    CoefficientMatrix coefficients;
    double ridge = 0.0;
    double solve_residual = 0.0;   // |G c - b| / |b|
    double target_norm_sq = 0.0;   // <T, T>
    double objective_rel = 0.0;    // sqrt(max(0, <T-R, T-R>) / <T, T>)
    int gram_dim = 0;
};

// Right-hand side <basis_alpha, target> for every real element, batched over
// shared space-time quadrature nodes.
inline Eigen::VectorXd assemble_rhs(const BasisSet& basis, const DensityFunctions& target,
                                    const ScalarProductSpec& spec, double panel_max) {
    spec.validate();
    const int n = basis.size();
    const int dim = pair_basis_dim(n);
    const double L = basis.box_half_width;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);

    std::vector<double> ts, tw, xs, xw;
    detail::time_nodes(spec, panel_max, ts, tw);

    Eigen::MatrixXd v, vp;
    for (size_t r = 0; r < ts.size(); ++r) {
        const double t = ts[r];
        std::vector<SupportWindow> win =
            target.support ? target.support(t) : std::vector<SupportWindow>{{-L, L}};
        win = detail::clip_windows(std::move(win), -L, L);
        if (spec.mask && std::abs(t) < spec.mask_half_time)
            win = detail::subtract_interval(win, -spec.mask_half_width, spec.mask_half_width);
        win = detail::split_at(win, 0.0);
        detail::panel_nodes(win, panel_max, xs, xw);
        const int nq = static_cast<int>(xs.size());
        if (nq == 0) continue;

        v.resize(nq, n);
        vp.resize(nq, n);
        Eigen::VectorXd wr(nq), wm(nq), we(nq);
        for (int q = 0; q < nq; ++q) {
            for (int m = 0; m < n; ++m) {
                v(q, m) = eval_mode(basis.modes[m], xs[q]);
                vp(q, m) = eval_mode_prime(basis.modes[m], xs[q]);
            }
            wr[q] = xw[q] * target.rho(xs[q], t);
            wm[q] = xw[q] * target.mom(xs[q], t);
            we[q] = xw[q] * target.en(xs[q], t);
        }
        const Eigen::MatrixXd a0 = v.transpose() * wr.asDiagonal() * v;
        const Eigen::MatrixXd bm = vp.transpose() * wm.asDiagonal() * v;
        const Eigen::MatrixXd a1 = bm - bm.transpose();
        const Eigen::MatrixXd a2 = v.transpose() * we.asDiagonal() * v;

        const double wt = tw[r];
        for (int idx = 0; idx < dim; ++idx) {
            const PairElement e = pair_element_at(n, idx);
            const double omega = basis.modes[e.j].omega - basis.modes[e.i].omega;
            const double c_en = 0.25 * (basis.modes[e.i].k * basis.modes[e.i].k +
                                        basis.modes[e.j].k * basis.modes[e.j].k);
            double val = 0.0;
            switch (e.type) {
                case PairElementType::Diag:
                    val = spec.w0 * a0(e.i, e.i) + spec.w2 * c_en * a2(e.i, e.i);
                    break;
                case PairElementType::Sym:
                    val = std::cos(omega * t) *
                              (2.0 * spec.w0 * a0(e.i, e.j) + 2.0 * spec.w2 * c_en * a2(e.i, e.j)) +
                          std::sin(omega * t) * spec.w1 * a1(e.i, e.j);
                    break;
                case PairElementType::Asym:
                    val = -std::sin(omega * t) *
                              (2.0 * spec.w0 * a0(e.i, e.j) + 2.0 * spec.w2 * c_en * a2(e.i, e.j)) +
                          std::cos(omega * t) * spec.w1 * a1(e.i, e.j);
                    break;
            }
            b[idx] += wt * val;
        }
    }
    return b;
}

inline ProjectionResult project_target(const BasisSet& basis, const DensityFunctions& target,
                                       const ScalarProductSpec& spec,
                                       const ProjectionOptions& opts = {}) {
    spec.validate();
    const double k_max = basis.max_wavenumber();
    double panel_max = opts.panel_max;
    if (panel_max <= 0.0) panel_max = M_PI / (3.0 * k_max);

    const Eigen::MatrixXd g = assemble_gram(basis, spec);
    const Eigen::VectorXd b = assemble_rhs(basis, target, spec, panel_max);

    ProjectionResult res;
    res.gram_dim = static_cast<int>(g.rows());
    res.ridge = opts.ridge >= 0.0 ? opts.ridge : default_ridge(g);
    const Eigen::VectorXd c = solve_regularized_symmetric(g, b, res.ridge);
    res.coefficients.n_modes = basis.size();
    res.coefficients.coeffs = c;
    res.solve_residual = (g * c - b).norm() / std::max(b.norm(), 1e-300);
    res.target_norm_sq =
        scalar_product(target, target, spec, basis.box_half_width, panel_max);
    const double obj = res.target_norm_sq - 2.0 * b.dot(c) + c.dot(g * c);
    res.objective_rel = std::sqrt(std::max(0.0, obj) / std::max(res.target_norm_sq, 1e-300));
    return res;
}

// ---------------------------------------------------------------------------
// Reconstruction

struct ReconstructionResult {
    DensityTriple densities;
    TrajectoryComponents components;
    bool has_components = false;
};

inline ReconstructionResult reconstruct(const BasisSet& basis, const CoefficientMatrix& cm,
                                        const Grid1D& x, const std::vector<double>& times,
                                        bool with_components = false,
                                        PhysicalConstants constants = {}) {
    if (cm.n_modes != basis.size())
        throw std::invalid_argument("reconstruct: coefficient size does not match basis");
    const int n = basis.size();
    const int nt = static_cast<int>(times.size());

    Eigen::MatrixXd v(x.n, n), vp(x.n, n);
    for (int q = 0; q < x.n; ++q)
        for (int m = 0; m < n; ++m) {
            v(q, m) = eval_mode(basis.modes[m], x.point(q));
            vp(q, m) = eval_mode_prime(basis.modes[m], x.point(q));
        }

    Eigen::MatrixXd c_en(n, n), ka(n, n), kb(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double ki2 = basis.modes[i].k * basis.modes[i].k;
            const double kj2 = basis.modes[j].k * basis.modes[j].k;
            c_en(i, j) = 0.25 * (ki2 + kj2);
            ka(i, j) = -(ki2 + 3.0 * kj2) / 8.0;
            kb(i, j) = (3.0 * ki2 + kj2) / 8.0;
        }

    ReconstructionResult out;
    out.densities.x = x;
    out.densities.times = times;
    out.densities.rho.resize(nt, x.n);
    out.densities.mom.resize(nt, x.n);
    out.densities.en.resize(nt, x.n);
    out.has_components = with_components;
    if (with_components) {
        out.components.x = x;
        out.components.times = times;
        out.components.phi0.resize(nt, x.n);
        out.components.phi1.resize(nt, x.n);
        out.components.phi2.resize(nt, x.n);
        out.components.phi3.resize(nt, x.n);
    }

    Eigen::MatrixXd m_sym(n, n), w_asym(n, n);
    for (int r = 0; r < nt; ++r) {
        const double t = times[r];
        m_sym.setZero();
        w_asym.setZero();
        for (int idx = 0; idx < cm.coeffs.size(); ++idx) {
            const PairElement e = pair_element_at(n, idx);
            const double cval = cm.coeffs[idx];
            if (e.type == PairElementType::Diag) {
                m_sym(e.i, e.i) += cval;
                continue;
            }
            const double omega = basis.modes[e.j].omega - basis.modes[e.i].omega;
            const double cos_t = std::cos(omega * t), sin_t = std::sin(omega * t);
            if (e.type == PairElementType::Sym) {
                m_sym(e.i, e.j) += cval * cos_t;
                m_sym(e.j, e.i) += cval * cos_t;
                w_asym(e.i, e.j) += cval * sin_t;
                w_asym(e.j, e.i) -= cval * sin_t;
            } else {
                m_sym(e.i, e.j) -= cval * sin_t;
                m_sym(e.j, e.i) -= cval * sin_t;
                w_asym(e.i, e.j) += cval * cos_t;
                w_asym(e.j, e.i) -= cval * cos_t;
            }
        }

        const Eigen::VectorXd rho = ((v * m_sym).cwiseProduct(v)).rowwise().sum();
        const Eigen::VectorXd mom = ((vp * w_asym).cwiseProduct(v)).rowwise().sum();
        const Eigen::VectorXd en =
            ((v * m_sym.cwiseProduct(c_en)).cwiseProduct(v)).rowwise().sum();
        out.densities.rho.row(r) = rho.transpose();
        out.densities.mom.row(r) = mom.transpose();
        out.densities.en.row(r) = en.transpose();

        if (with_components) {
            const double hbar = constants.hbar;
            const Eigen::VectorXd phi2 =
                -((v * m_sym.cwiseProduct(c_en)).cwiseProduct(v)).rowwise().sum() -
                0.5 * ((vp * m_sym).cwiseProduct(vp)).rowwise().sum();
            const Eigen::VectorXd phi3 =
                ((vp * w_asym.cwiseProduct(ka)).cwiseProduct(v)).rowwise().sum() +
                ((v * w_asym.cwiseProduct(kb)).cwiseProduct(vp)).rowwise().sum();
            for (int q = 0; q < x.n; ++q) {
                out.components.phi0(r, q) = rho[q];
                out.components.phi1(r, q) = std::complex<double>(0.0, mom[q] / hbar);
                out.components.phi2(r, q) = phi2[q];
                out.components.phi3(r, q) = std::complex<double>(0.0, phi3[q]);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Packet statistics (rho^4-weighted moments)

struct PacketStats {
    std::vector<double> times;
    std::vector<double> mass;   // plain integral of rho
    std::vector<double> center; // rho^4-weighted mean position
    std::vector<double> spread; // rho^4-weighted standard deviation
};

inline PacketStats packet_stats(const DensityTriple& d) {
    PacketStats s;
    const int nt = static_cast<int>(d.times.size());
    s.times = d.times;
    s.mass.resize(nt);
    s.center.resize(nt);
    s.spread.resize(nt);
    const double h = d.x.spacing();
    for (int r = 0; r < nt; ++r) {
        double mass = 0.0, w_sum = 0.0, xw_sum = 0.0;
        for (int q = 0; q < d.x.n; ++q) {
            const double rho = d.rho(r, q);
            const double w = rho * rho * rho * rho;
            const double edge = (q == 0 || q == d.x.n - 1) ? 0.5 : 1.0;
            mass += edge * rho * h;
            w_sum += w;
            xw_sum += w * d.x.point(q);
        }
        s.mass[r] = mass;
        if (w_sum <= 0.0) {
            s.center[r] = std::nan("");
            s.spread[r] = std::nan("");
            continue;
        }
        const double xm = xw_sum / w_sum;
        double var = 0.0;
        for (int q = 0; q < d.x.n; ++q) {
            const double rho = d.rho(r, q);
            const double w = rho * rho * rho * rho;
            const double dx = d.x.point(q) - xm;
            var += w * dx * dx;
        }
        s.center[r] = xm;
        s.spread[r] = std::sqrt(var / w_sum);
    }
    return s;
}

} // namespace qmat
