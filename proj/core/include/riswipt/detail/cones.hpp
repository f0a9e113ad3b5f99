#pragma once

#include <Eigen/Dense>
#include <vector>

namespace riswipt::conic::detail {

/// Cone layout of the slack vector, in row order:
/// zero rows, nonneg rows, second-order cones, Hermitian-PSD cones (one
/// complex d x d matrix packed into d^2 reals: diagonal, then per lower
/// off-diagonal entry sqrt(2)*re and sqrt(2)*im, column-major), and
/// exponential cones (3 rows each, (a, b, c) with b*exp(a/b) <= c).
struct ConeSpec {
    int zero = 0;
    int nonneg = 0;
    std::vector<int> soc;   // dims
    std::vector<int> herm;  // complex dims d (d^2 rows each)
    int exp_cones = 0;

    int rows() const {
        int m = zero + nonneg + 3 * exp_cones;
        for (int d : soc) m += d;
        for (int d : herm) m += d * d;
        return m;
    }
};

/// Projection onto the second-order cone {(t, z): ||z|| <= t}, in place.
void project_soc(Eigen::Ref<Eigen::VectorXd> block);

/// Projection onto the Hermitian PSD cone in the packed coordinates above.
void project_herm_psd(Eigen::Ref<Eigen::VectorXd> block, int dim);

/// Root-finding state carried across projections of a slowly-moving point.
struct ExpState {
    double rho = 0.0;  // outer KKT multiplier
    double x = 0.0;    // inner Newton variable
};

/// Projection onto the exponential cone K = cl{(a,b,c): b>0, b e^{a/b} <= c}.
Eigen::Vector3d project_exp_cone(const Eigen::Vector3d& v, ExpState& state);

/// Projection onto the dual exponential cone via Moreau decomposition.
Eigen::Vector3d project_exp_dual_cone(const Eigen::Vector3d& v, ExpState& state);

bool in_exp_cone(const Eigen::Vector3d& v, double tol = 0.0);
bool in_exp_polar_cone(const Eigen::Vector3d& v, double tol = 0.0);

/// Projects y onto the dual cone K* of the spec, in place (layout above).
/// Zero rows are dual to the free cone; nonneg/SOC/PSD are self-dual.
/// exp_warm must hold one slot per exponential cone.
void project_dual_cones(Eigen::Ref<Eigen::VectorXd> y, const ConeSpec& spec,
                        std::vector<ExpState>& exp_warm);

/// Projects s onto K itself, in place (used for warm starts and checks).
void project_primal_cones(Eigen::Ref<Eigen::VectorXd> s, const ConeSpec& spec,
                          std::vector<ExpState>& exp_warm);

}  // namespace riswipt::conic::detail
