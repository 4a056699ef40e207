#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

#include "qmat/grid.hpp"

namespace qmat {

struct PhysicalConstants {
    double mass = 1.0;
    double hbar = 1.0;
};

// Two-coordinate density-matrix field phi(x_S, x_D) sampled on rectangular
// grids; rows follow x_S, columns follow x_D. The x_D grid is symmetric with
// an exact zero sample. Hermiticity means phi(x_S, -x_D) = conj(phi(x_S, x_D)).
struct QuantumMatrixField {
    Grid1D xs;
    Grid1D xd;
    PhysicalConstants constants;
    Eigen::MatrixXcd values;

    void validate() const {
        if (values.rows() != xs.n || values.cols() != xd.n)
            throw std::invalid_argument("QuantumMatrixField: value shape does not match grids");
        if (xd.n % 2 == 0 || !xd.is_symmetric())
            throw std::invalid_argument("QuantumMatrixField: x_D grid must be symmetric with a "
                                        "zero sample");
    }

    double hermiticity_error() const {
        const double scale = values.cwiseAbs().maxCoeff();
        if (scale == 0.0) return 0.0;
        double worst = 0.0;
        const int nc = xd.n;
        for (int i = 0; i < values.rows(); ++i)
            for (int j = 0; j < nc; ++j) {
                const std::complex<double> a = values(i, j);
                const std::complex<double> b = std::conj(values(i, nc - 1 - j));
                worst = std::max(worst, std::abs(a - b));
            }
        return worst / scale;
    }
};

// Phase-space density F(x_S, p_S); rows follow x_S, columns follow p_S.
struct WignerField {
    Grid1D xs;
    Grid1D ps;
    PhysicalConstants constants;
    Eigen::MatrixXd values;

    void validate() const {
        if (values.rows() != xs.n || values.cols() != ps.n)
            throw std::invalid_argument("WignerField: value shape does not match grids");
    }

    double norm_max() const { return values.cwiseAbs().maxCoeff(); }
};

} // namespace qmat
