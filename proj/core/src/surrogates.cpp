#include "riswipt/surrogates.hpp"

#include <stdexcept>

namespace riswipt::sca {

QuadOverLinBound quad_over_lin_lb(const MatrixXcd& b, const VectorXcd& x_t, double y_t) {
    if (!(y_t > 0.0)) throw std::invalid_argument("quad_over_lin_lb: y_t must be positive");
    QuadOverLinBound out;
    out.x_coef = (2.0 / y_t) * (b * x_t);
    out.y_coef = -std::real(x_t.dot(b * x_t)) / (y_t * y_t);
    return out;
}

QuadBound quad_lb(const MatrixXcd& b, const VectorXcd& x_t) {
    QuadBound out;
    out.x_coef = 2.0 * (b * x_t);
    out.constant = -std::real(x_t.dot(b * x_t));
    return out;
}

BilinearBound bilinear_lb(double e_t, double r_t) {
    BilinearBound out;
    const double s = e_t + r_t;
    out.constant = -0.5 * s * s;
    out.e_coef = s;
    out.r_coef = s;
    return out;
}

SquareBound square_lb(double z_t) {
    SquareBound out;
    out.constant = -z_t * z_t;
    out.z_coef = 2.0 * z_t;
    return out;
}

}  // namespace riswipt::sca
