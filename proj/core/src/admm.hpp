#pragma once

#include <Eigen/Dense>

#include "riswipt/detail/cones.hpp"

namespace riswipt::conic::detail {

/// min c'x  s.t.  Ax + s = b, s in K (ConeSpec row order).
struct ConicData {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    ConeSpec cones;
};

enum class AdmmStatus { optimal, infeasible, unbounded, max_iters, failure };

struct AdmmSettings {
    double eps = 1e-8;
    int max_iters = 100000;
    double alpha = 1.8;       // over-relaxation
    int ruiz_iters = 15;
    int check_interval = 25;
    double infeas_eps = 1e-9;  // certificate residual threshold
    int aa_memory = 8;         // Anderson acceleration depth, 0 disables
};

struct AdmmSolution {
    AdmmStatus status = AdmmStatus::failure;
    Eigen::VectorXd x, y, s;
    int iters = 0;
    double primal_res = 1e300;
    double dual_res = 1e300;
    double gap = 1e300;
    double pobj = 0.0;
};

/// Homogeneous self-dual embedding ADMM over the cones above. warm, when
/// non-null and dimension-compatible, seeds (x, y, s).
AdmmSolution solve_conic(const ConicData& data, const AdmmSettings& settings,
                         const AdmmSolution* warm = nullptr);

}  // namespace riswipt::conic::detail
