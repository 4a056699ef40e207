#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace qmat {

struct SingularSystemError : std::runtime_error {
    int near_null_directions;
    explicit SingularSystemError(int count)
        : std::runtime_error("solve_regularized_symmetric: system is singular; " +
                             std::to_string(count) + " near-null direction(s)"),
          near_null_directions(count) {}
};

inline double symmetry_error(const Eigen::MatrixXd& g) {
    const double scale = g.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (g - g.transpose()).cwiseAbs().maxCoeff() / scale;
}

// Solves (G + ridge*I) c = b for symmetric G via LDLT.
// ridge = 0 on a singular G raises SingularSystemError with the count of
// near-null pivots.
inline Eigen::VectorXd solve_regularized_symmetric(const Eigen::MatrixXd& g,
                                                   const Eigen::VectorXd& b,
                                                   double ridge = 0.0) {
    if (g.rows() != g.cols()) throw std::invalid_argument("solve_regularized_symmetric: G not square");
    if (g.rows() != b.size()) throw std::invalid_argument("solve_regularized_symmetric: size mismatch");
    if (ridge < 0.0) throw std::invalid_argument("solve_regularized_symmetric: negative ridge");
    if (symmetry_error(g) > 1e-10)
        throw std::invalid_argument("solve_regularized_symmetric: G is not symmetric");

    Eigen::MatrixXd a = g;
    if (ridge > 0.0) a.diagonal().array() += ridge;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    const Eigen::VectorXd d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    const double cutoff = dmax * 1e-14;
    int null_count = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (std::abs(d[i]) <= cutoff) ++null_count;
    if (null_count > 0 && ridge == 0.0) throw SingularSystemError(null_count);

    return ldlt.solve(b);
}

// Default ridge used by the projection pipeline.
inline double default_ridge(const Eigen::MatrixXd& g) {
    return 1e-8 * g.trace() / static_cast<double>(g.rows());
}

} // namespace qmat
