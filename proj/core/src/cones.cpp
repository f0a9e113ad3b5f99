#include "riswipt/detail/cones.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace riswipt::conic::detail {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kExpTol = 1e-14;

// Stationarity system for projecting (a0,b0,c0) onto the exp-cone boundary
// with multiplier rho > 0 (constraint written as a + b*log(b/c) <= 0):
//   a = a0 - rho
//   c solves  t(t + c0)/rho^2 - b0/rho + log(t/rho) + 1 = 0,  t = c - c0 > 0
//   b = (c - c0) c / rho
// Returns the boundary gap g(rho) = a + b log(b/c); the projection is the
// root of g. g is decreasing in rho.
struct ExpFixedRho {
    Eigen::Vector3d p;
    double gap;
};

// Root of  t*c/rho^2 - b0/rho + log(t/rho) + 1 = 0  with c = t + c0, t,c > 0.
// Solved in t when c0 >= 0 (t -> 0 regime well-conditioned) and in c when
// c0 < 0 (c -> 0 regime well-conditioned); the shifted quantity is then a sum
// of positives either way, never a cancellation. x_init warm-starts Newton.
std::pair<double, double> inner_root(double rho, double b0, double c0, double x_init) {
    const bool in_c = c0 < 0.0;
    const double log_rho = std::log(rho);
    const auto eval = [&](double x, double& f, double& fp) {
        if (in_c) {
            const double t = x - c0;  // = x + |c0|
            f = x * t / (rho * rho) - b0 / rho + std::log(t) - log_rho + 1.0;
            fp = (2.0 * x - c0) / (rho * rho) + 1.0 / t;
        } else {
            const double c = x + c0;
            f = x * c / (rho * rho) - b0 / rho + std::log(x) - log_rho + 1.0;
            fp = (2.0 * x + c0) / (rho * rho) + 1.0 / x;
        }
    };
    // f is increasing with f(0+) = -inf; safeguarded Newton with a growing
    // upper bracket.
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double x = x_init > 0.0 && std::isfinite(x_init) ? x_init
                                                     : std::max({rho, std::abs(b0), 1.0});
    double f, fp;
    for (int i = 0; i < 120; ++i) {
        eval(x, f, fp);
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        double xn = x - f / fp;
        if (!(xn > lo && xn < hi)) xn = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * x;
        if (std::abs(xn - x) <= 1e-16 * std::max(1e-300, x)) {
            x = xn;
            break;
        }
        x = xn;
    }
    return in_c ? std::make_pair(x - c0, x) : std::make_pair(x, x + c0);
}

ExpFixedRho solve_fixed_rho(const Eigen::Vector3d& v, double rho, double& x_warm) {
    const auto [t, c] = inner_root(rho, v[1], v[2], x_warm);
    x_warm = v[2] < 0.0 ? c : t;
    ExpFixedRho out;
    const double b = t * c / rho;
    out.p = {v[0] - rho, b, c};
    out.gap = (b <= 1e-300) ? out.p[0] : out.p[0] + b * std::log(b / c);
    return out;
}

}  // namespace

void project_soc(Eigen::Ref<Eigen::VectorXd> block) {
    const int d = static_cast<int>(block.size());
    if (d == 1) {
        block[0] = std::max(block[0], 0.0);
        return;
    }
    const double t = block[0];
    const double zn = block.tail(d - 1).norm();
    if (zn <= t) return;
    if (zn <= -t) {
        block.setZero();
        return;
    }
    const double a = 0.5 * (t + zn);
    block[0] = a;
    block.tail(d - 1) *= a / zn;
}

void project_herm_psd(Eigen::Ref<Eigen::VectorXd> block, int dim) {
    Eigen::MatrixXcd x(dim, dim);
    int idx = 0;
    for (int c = 0; c < dim; ++c) {
        x(c, c) = block[idx++];
        for (int r = c + 1; r < dim; ++r) {
            const std::complex<double> e(block[idx] / kSqrt2, block[idx + 1] / kSqrt2);
            idx += 2;
            x(r, c) = e;
            x(c, r) = std::conj(e);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(x);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    x = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    idx = 0;
    for (int c = 0; c < dim; ++c) {
        block[idx++] = std::real(x(c, c));
        for (int r = c + 1; r < dim; ++r) {
            block[idx++] = kSqrt2 * std::real(x(r, c));
            block[idx++] = kSqrt2 * std::imag(x(r, c));
        }
    }
}

bool in_exp_cone(const Eigen::Vector3d& v, double tol) {
    if (v[1] > 0.0) {
        const double r = v[0] / v[1];
        if (r <= 700.0 && v[1] * std::exp(r) <= v[2] + tol) return true;
    }
    // within tol of the b = 0 face {a <= 0, c >= 0}
    return std::abs(v[1]) <= tol && v[0] <= tol && v[2] >= -tol;
}

bool in_exp_polar_cone(const Eigen::Vector3d& v, double tol) {
    if (v[0] > 0.0) {
        const double r = v[1] / v[0];
        if (r <= 700.0 && v[0] * std::exp(r) <= -M_E * v[2] + tol) return true;
    }
    // within tol of the a = 0 face {b <= 0, c <= 0}
    return std::abs(v[0]) <= tol && v[1] <= tol && v[2] <= tol;
}

Eigen::Vector3d project_exp_cone(const Eigen::Vector3d& v, ExpState& state) {
    if (in_exp_cone(v, kExpTol * std::max(1.0, v.norm()))) return v;
    if (in_exp_polar_cone(v, kExpTol * std::max(1.0, v.norm()))) return Eigen::Vector3d::Zero();
    if (v[0] <= 0.0 && v[1] <= 0.0) return {v[0], 0.0, std::max(v[2], 0.0)};

    // Bracket the multiplier: gap(rho) decreasing, gap(0+) > 0, gap(inf) < 0.
    double x_warm = state.x;
    double lo = 0.0, hi = state.rho > 0.0 && std::isfinite(state.rho) ? state.rho : 1.0;
    double glo = std::numeric_limits<double>::infinity();
    ExpFixedRho at_hi = solve_fixed_rho(v, hi, x_warm);
    for (int guard = 0; at_hi.gap > 0.0 && guard < 300; ++guard) {
        lo = hi;
        glo = at_hi.gap;
        hi *= 2.0;
        at_hi = solve_fixed_rho(v, hi, x_warm);
    }
    double ghi = at_hi.gap;
    if (state.rho > 0.0 && lo == 0.0) {
        // warm-started too high: walk the bracket down
        double probe = hi / 2.0;
        while (probe > 1e-30) {
            ExpFixedRho at = solve_fixed_rho(v, probe, x_warm);
            if (at.gap > 0.0) {
                lo = probe;
                glo = at.gap;
                break;
            }
            hi = probe;
            ghi = at.gap;
            at_hi = at;
            probe /= 2.0;
        }
    }

    // Illinois-damped regula falsi on the bracket; keep the point with the
    // smallest boundary gap seen on either side.
    ExpFixedRho best = at_hi;
    int side = 0;
    for (int i = 0; i < 80; ++i) {
        double mid;
        if (std::isfinite(glo) && std::isfinite(ghi) && ghi != glo)
            mid = (lo * ghi - hi * glo) / (ghi - glo);
        else
            mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        ExpFixedRho at = solve_fixed_rho(v, mid, x_warm);
        if (std::abs(at.gap) < std::abs(best.gap)) best = at;
        if (at.gap > 0.0) {
            lo = mid;
            glo = at.gap;
            if (side == 1) ghi *= 0.5;
            side = 1;
        } else {
            hi = mid;
            ghi = at.gap;
            if (side == -1) glo *= 0.5;
            side = -1;
        }
        if (hi - lo <= 1e-14 * std::max(1e-12, hi) || std::abs(at.gap) < 1e-15 * (1.0 + v.norm()))
            break;
    }
    state.rho = 0.5 * (lo + hi);
    state.x = x_warm;
    return best.p;
}

Eigen::Vector3d project_exp_dual_cone(const Eigen::Vector3d& v, ExpState& state) {
    // Moreau: v = proj_K(v) + proj_{-K*}(v)  =>  proj_{K*}(v) = v + proj_K(-v).
    return v + project_exp_cone(-v, state);
}

void project_dual_cones(Eigen::Ref<Eigen::VectorXd> y, const ConeSpec& spec,
                        std::vector<ExpState>& exp_warm) {
    int at = spec.zero;  // zero-cone rows are dual-free: untouched
    y.segment(at, spec.nonneg) = y.segment(at, spec.nonneg).cwiseMax(0.0);
    at += spec.nonneg;
    for (int d : spec.soc) {
        project_soc(y.segment(at, d));
        at += d;
    }
    for (int d : spec.herm) {
        project_herm_psd(y.segment(at, d * d), d);
        at += d * d;
    }
    exp_warm.resize(static_cast<std::size_t>(spec.exp_cones));
    for (int e = 0; e < spec.exp_cones; ++e) {
        y.segment<3>(at) = project_exp_dual_cone(y.segment<3>(at), exp_warm[e]);
        at += 3;
    }
}

void project_primal_cones(Eigen::Ref<Eigen::VectorXd> s, const ConeSpec& spec,
                          std::vector<ExpState>& exp_warm) {
    int at = 0;
    s.segment(at, spec.zero).setZero();
    at += spec.zero;
    s.segment(at, spec.nonneg) = s.segment(at, spec.nonneg).cwiseMax(0.0);
    at += spec.nonneg;
    for (int d : spec.soc) {
        project_soc(s.segment(at, d));
        at += d;
    }
    for (int d : spec.herm) {
        project_herm_psd(s.segment(at, d * d), d);
        at += d * d;
    }
    exp_warm.resize(static_cast<std::size_t>(spec.exp_cones));
    for (int e = 0; e < spec.exp_cones; ++e) {
        s.segment<3>(at) = project_exp_cone(s.segment<3>(at), exp_warm[e]);
        at += 3;
    }
}

}  // namespace riswipt::conic::detail
