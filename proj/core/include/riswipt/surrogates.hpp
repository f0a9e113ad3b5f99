#pragma once

#include <Eigen/Dense>
#include <vector>

namespace riswipt::sca {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

/// Affine lower bound of the convex F_B(x, y) = x^H B x / y at (x_t, y_t):
///   F_lb(x, y) = (2/y_t) Re(x_t^H B x) - (x_t^H B x_t / y_t^2) y.
struct QuadOverLinBound {
    VectorXcd x_coef;  // bound contributes Re(x_coef^H x)
    double y_coef = 0.0;

    double eval(const VectorXcd& x, double y) const {
        return std::real(x_coef.dot(x)) + y_coef * y;
    }
};

QuadOverLinBound quad_over_lin_lb(const MatrixXcd& b, const VectorXcd& x_t, double y_t);

/// Affine lower bound of G_B(x) = x^H B x at x_t: 2 Re(x_t^H B x) - x_t^H B x_t.
struct QuadBound {
    VectorXcd x_coef;
    double constant = 0.0;

    double eval(const VectorXcd& x) const { return std::real(x_coef.dot(x)) + constant; }
};

QuadBound quad_lb(const MatrixXcd& b, const VectorXcd& x_t);

/// Affine lower bound of (1/2)(e + r)^2 at (e_t, r_t).
struct BilinearBound {
    double constant = 0.0;
    double e_coef = 0.0;
    double r_coef = 0.0;

    double eval(double e, double r) const { return constant + e_coef * e + r_coef * r; }
};

BilinearBound bilinear_lb(double e_t, double r_t);

/// Affine lower bound of z^2 at z_t: 2 z_t z - z_t^2.
struct SquareBound {
    double constant = 0.0;
    double z_coef = 0.0;

    double eval(double z) const { return constant + z_coef * z; }
};

SquareBound square_lb(double z_t);

}  // namespace riswipt::sca
