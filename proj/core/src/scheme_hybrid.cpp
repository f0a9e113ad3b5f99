#include "riswipt/scheme_hybrid.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "riswipt/surrogates.hpp"

namespace riswipt {

namespace {

constexpr double kLn2 = 0.6931471805599453;

std::vector<std::vector<VectorXcd>> effective_rows(const ChannelSet& cs, const VectorXcd& v) {
    std::vector<std::vector<VectorXcd>> a(cs.k_pairs, std::vector<VectorXcd>(cs.k_pairs));
    for (int i = 0; i < cs.k_pairs; ++i)
        for (int k = 0; k < cs.k_pairs; ++k) a[i][k] = effective_channel(cs.H[i][k], v);
    return a;
}

double beam_power(const VectorXcd& a, const MatrixXcd& s) { return std::real(a.dot(s * a)); }

MatrixXcd psd_clip(const MatrixXcd& s) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (s + s.adjoint()));
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

MatrixXcd psd_sqrt(const MatrixXcd& s) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (s + s.adjoint()));
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

VectorXcd snap_phases(VectorXcd v) {
    const int n = static_cast<int>(v.size()) - 1;
    for (int e = 0; e < n; ++e) {
        const double m = std::abs(v[e]);
        if (m > 1.0) v[e] /= m;
    }
    v[n] = 1.0;
    return v;
}

// Re-derives the slack variables from the primary ones so the expansion
// point is tight: e_k = tau2/rho_k, z_k covers exactly the EH shortfall left
// after slot 1 (capped by what slot 2 can deliver).
HybridIterate canonicalize(const ChannelSet& cs, HybridIterate it, const NoiseAndPower& np,
                           const std::array<bool, 3>& active, double clamp) {
    const int k_pairs = cs.k_pairs;
    for (auto& vj : it.v) vj = snap_phases(std::move(vj));
    for (int j = 0; j < 3; ++j)
        if (!active[j]) {
            it.tau[j] = 0.0;
            for (int i = 0; i < k_pairs; ++i) it.W[i][j].setZero();
        }
    const auto a1 = effective_rows(cs, it.v[0]);
    const auto a2 = effective_rows(cs, it.v[1]);
    it.e.assign(k_pairs, 0.0);
    it.z.assign(k_pairs, 0.0);
    for (int k = 0; k < k_pairs; ++k) {
        it.rho[k] = std::min(std::max(it.rho[k], 0.0), 1.0);
        if (it.tau[1] > 0.0) it.e[k] = it.tau[1] / std::max(it.rho[k], clamp);
        if (!active[1]) continue;
        double slot1 = 0.0, slot2 = 0.0;
        for (int i = 0; i < k_pairs; ++i) {
            if (active[0]) slot1 += np.zeta * beam_power(a1[i][k], it.W[i][0]);
            slot2 += np.zeta * beam_power(a2[i][k], it.W[i][1]);
        }
        const double need = std::max(0.0, np.e_req[k] - slot1);
        const double avail = std::max(0.0, (1.0 - it.rho[k]) * slot2);
        it.z[k] = std::sqrt(std::min(need, avail));
    }
    return it;
}

}  // namespace

HybridVariant variant_of(Scheme s) {
    switch (s) {
        case Scheme::ps: return HybridVariant::ps_only;
        case Scheme::ts: return HybridVariant::ts_only;
        default: return HybridVariant::hybrid;
    }
}

std::array<bool, 3> hybrid_active_slots(HybridVariant v) {
    switch (v) {
        case HybridVariant::ps_only: return {false, true, false};
        case HybridVariant::ts_only: return {true, false, true};
        case HybridVariant::hybrid: return {true, true, true};
    }
    return {true, true, true};
}

double HybridG2::eval(const std::vector<MatrixXcd>& w2, double e, double tau2) const {
    double out = constant + e_coef * e + tau_coef * tau2;
    for (std::size_t i = 0; i < w_coef.size(); ++i)
        out += std::real((w_coef[i] * w2[i]).trace());
    return out;
}

double hybrid_g2_exact(const std::vector<VectorXcd>& a2, int k,
                       const std::vector<MatrixXcd>& w2, double e, double tau2,
                       double sigma_ant_sq, double sigma_proc_sq) {
    if (tau2 <= 0.0) return 0.0;
    double intf = 0.0;
    for (std::size_t i = 0; i < a2.size(); ++i)
        if (static_cast<int>(i) != k) intf += beam_power(a2[i], w2[i]);
    return tau2 * std::log2(intf / tau2 + e * sigma_proc_sq / tau2 + sigma_ant_sq);
}

HybridG2 surrogate_g2(const std::vector<VectorXcd>& a2, int k,
                      const std::vector<MatrixXcd>& w2_t, double e_t, double tau2_t,
                      double sigma_ant_sq, double sigma_proc_sq, double clamp) {
    const double tau_c = std::max(tau2_t, clamp);
    const double e_c = std::max(e_t, clamp);
    HybridG2 out;
    double intf = 0.0;
    const int n = static_cast<int>(a2.size());
    for (int i = 0; i < n; ++i)
        if (i != k) intf += beam_power(a2[i], w2_t[i]);
    out.psi = intf / tau_c + e_c * sigma_proc_sq / tau_c + sigma_ant_sq;
    if (!(out.psi > 0.0)) throw std::invalid_argument("surrogate_g2: nonpositive Psi");
    const double inv = 1.0 / (out.psi * kLn2);
    out.w_coef.assign(n, MatrixXcd());
    for (int i = 0; i < n; ++i)
        out.w_coef[i] = i == k ? MatrixXcd::Zero(w2_t[i].rows(), w2_t[i].cols())
                               : MatrixXcd(inv * a2[i] * a2[i].adjoint());
    out.e_coef = sigma_proc_sq * inv;
    out.tau_coef = std::log2(out.psi) - (out.psi - sigma_ant_sq) * inv;
    out.constant =
        tau_c * std::log2(out.psi) - intf * inv - e_c * out.e_coef - tau_c * out.tau_coef;
    return out;
}

double HybridG3::eval(const std::vector<MatrixXcd>& w3, double tau3) const {
    double out = constant + tau_coef * tau3;
    for (std::size_t i = 0; i < w_coef.size(); ++i)
        out += std::real((w_coef[i] * w3[i]).trace());
    return out;
}

double hybrid_g3_exact(const std::vector<VectorXcd>& a3, int k,
                       const std::vector<MatrixXcd>& w3, double tau3, double sigma_sq) {
    if (tau3 <= 0.0) return 0.0;
    double intf = 0.0;
    for (std::size_t i = 0; i < a3.size(); ++i)
        if (static_cast<int>(i) != k) intf += beam_power(a3[i], w3[i]);
    return tau3 * std::log2(intf / tau3 + sigma_sq);
}

HybridG3 surrogate_g3(const std::vector<VectorXcd>& a3, int k,
                      const std::vector<MatrixXcd>& w3_t, double tau3_t, double sigma_sq,
                      double clamp) {
    const double tau_c = std::max(tau3_t, clamp);
    HybridG3 out;
    double intf = 0.0;
    const int n = static_cast<int>(a3.size());
    for (int i = 0; i < n; ++i)
        if (i != k) intf += beam_power(a3[i], w3_t[i]);
    out.psi = intf / tau_c + sigma_sq;
    if (!(out.psi > 0.0)) throw std::invalid_argument("surrogate_g3: nonpositive Psi");
    const double inv = 1.0 / (out.psi * kLn2);
    out.w_coef.assign(n, MatrixXcd());
    for (int i = 0; i < n; ++i)
        out.w_coef[i] = i == k ? MatrixXcd::Zero(w3_t[i].rows(), w3_t[i].cols())
                               : MatrixXcd(inv * a3[i] * a3[i].adjoint());
    out.tau_coef = std::log2(out.psi) - (out.psi - sigma_sq) * inv;
    out.constant = tau_c * std::log2(out.psi) - intf * inv - tau_c * out.tau_coef;
    return out;
}

HybridBlock1 build_block1_program(const ChannelSet& cs, const HybridIterate& it,
                                  const NoiseAndPower& np, const AoOptions& opt,
                                  const std::array<bool, 3>& active) {
    const int k_pairs = cs.k_pairs;
    const int m = cs.m_antennas;
    HybridBlock1 b;
    b.active = active;
    auto& p = b.program;

    b.w.assign(k_pairs, {});
    for (int i = 0; i < k_pairs; ++i)
        for (int j = 0; j < 3; ++j)
            if (active[j]) {
                b.w[i][j] = p.add_hermitian_psd(m);
                p.hint(b.w[i][j], it.W[i][j]);
            }
    for (int j = 0; j < 3; ++j)
        if (active[j]) {
            b.tau[j] = p.add_scalar(0.0);
            p.hint(b.tau[j], it.tau[j]);
        }
    if (active[1]) {
        for (int k = 0; k < k_pairs; ++k) {
            b.rho.push_back(p.add_scalar(0.0, 1.0));
            b.e.push_back(p.add_scalar(0.0));
            b.z.push_back(p.add_scalar(0.0));
            p.hint(b.rho[k], it.rho[k]);
            p.hint(b.e[k], it.e[k]);
            p.hint(b.z[k], it.z[k]);
        }
    }

    const auto a1 =
        active[0] ? effective_rows(cs, it.v[0]) : std::vector<std::vector<VectorXcd>>();
    const auto a2 =
        active[1] ? effective_rows(cs, it.v[1]) : std::vector<std::vector<VectorXcd>>();
    const auto a3 =
        active[2] ? effective_rows(cs, it.v[2]) : std::vector<std::vector<VectorXcd>>();

    std::vector<MatrixXcd> w2_t(k_pairs), w3_t(k_pairs);
    for (int i = 0; i < k_pairs; ++i) {
        if (active[1]) w2_t[i] = it.W[i][1];
        if (active[2]) w3_t[i] = it.W[i][2];
    }

    for (int k = 0; k < k_pairs; ++k) {
        if (active[1]) {
            std::vector<VectorXcd> a2k(k_pairs);
            for (int i = 0; i < k_pairs; ++i) a2k[i] = a2[i][k];
            conic::LinExpr y2;
            for (int i = 0; i < k_pairs; ++i)
                y2.add_re_trace(b.w[i][1], a2k[i] * a2k[i].adjoint());
            y2.add(b.e[k], np.sigma_proc_sq[k]);
            y2.add(b.tau[1], np.sigma_ant_sq[k]);
            p.maximize_add_perspective_log2(b.tau[1], y2);

            const HybridG2 g2 = surrogate_g2(a2k, k, w2_t, it.e[k], it.tau[1],
                                             np.sigma_ant_sq[k], np.sigma_proc_sq[k], opt.clamp);
            conic::LinExpr neg_g2(-g2.constant);
            for (int i = 0; i < k_pairs; ++i)
                if (i != k) neg_g2.add_re_trace(b.w[i][1], -g2.w_coef[i]);
            neg_g2.add(b.e[k], -g2.e_coef);
            neg_g2.add(b.tau[1], -g2.tau_coef);
            p.maximize_add(neg_g2);
        }
        if (active[2]) {
            std::vector<VectorXcd> a3k(k_pairs);
            for (int i = 0; i < k_pairs; ++i) a3k[i] = a3[i][k];
            conic::LinExpr y3;
            for (int i = 0; i < k_pairs; ++i)
                y3.add_re_trace(b.w[i][2], a3k[i] * a3k[i].adjoint());
            y3.add(b.tau[2], np.sigma_sq(k));
            p.maximize_add_perspective_log2(b.tau[2], y3);

            const HybridG3 g3 = surrogate_g3(a3k, k, w3_t, it.tau[2], np.sigma_sq(k), opt.clamp);
            conic::LinExpr neg_g3(-g3.constant);
            for (int i = 0; i < k_pairs; ++i)
                if (i != k) neg_g3.add_re_trace(b.w[i][2], -g3.w_coef[i]);
            neg_g3.add(b.tau[2], -g3.tau_coef);
            p.maximize_add(neg_g3);
        }
    }

    for (int k = 0; k < k_pairs; ++k) {
        if (active[1]) {
            // tau2 <= e*rho through the bilinear lower bound:
            // e^2 + rho^2 <= 2*(chi_lb(e, rho) - tau2)
            const auto chi =
                sca::bilinear_lb(std::max(it.e[k], opt.clamp), std::max(it.rho[k], opt.clamp));
            conic::LinExpr rhs(2.0 * chi.constant);
            rhs.add(b.e[k], 2.0 * chi.e_coef);
            rhs.add(b.rho[k], 2.0 * chi.r_coef);
            rhs.add(b.tau[1], -2.0);
            conic::CAffine ce, cr;
            ce.re.add(b.e[k], 1.0);
            cr.re.add(b.rho[k], 1.0);
            p.require_quad_le({ce, cr}, rhs);
        }
        if (np.e_req[k] > 0.0) {
            conic::LinExpr eh(-np.e_req[k]);
            if (active[0])
                for (int i = 0; i < k_pairs; ++i)
                    eh.add_re_trace(b.w[i][0], np.zeta * a1[i][k] * a1[i][k].adjoint());
            if (active[1]) {
                const auto zb = sca::square_lb(it.z[k]);
                eh.add_constant(zb.constant);
                eh.add(b.z[k], zb.z_coef);
                // z^2 <= (1-rho) * zeta * slot-2 received power
                conic::LinExpr one_minus_rho(1.0);
                one_minus_rho.add(b.rho[k], -1.0);
                conic::LinExpr pow2;
                for (int i = 0; i < k_pairs; ++i)
                    pow2.add_re_trace(b.w[i][1], np.zeta * a2[i][k] * a2[i][k].adjoint());
                conic::CAffine cz;
                cz.re.add(b.z[k], 1.0);
                p.require_prod_ge(one_minus_rho, pow2, {cz});
            }
            p.require_ge(eh);
        }
    }

    for (int i = 0; i < k_pairs; ++i)
        for (int j = 0; j < 3; ++j)
            if (active[j]) {
                conic::LinExpr pw;
                pw.add(b.tau[j], np.p_max[i]);
                pw.add_re_trace(b.w[i][j], -MatrixXcd::Identity(m, m));
                p.require_ge(pw);
            }
    conic::LinExpr time(1.0);
    for (int j = 0; j < 3; ++j)
        if (active[j]) time.add(b.tau[j], -1.0);
    p.require_ge(time);
    return b;
}

std::vector<std::vector<MatrixXcd>> recover_covariances(
    const std::vector<std::vector<MatrixXcd>>& w, const std::array<double, 3>& tau,
    double tau_zero_tol) {
    std::vector<std::vector<MatrixXcd>> s(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        s[i].resize(w[i].size());
        for (std::size_t j = 0; j < w[i].size(); ++j)
            s[i][j] = tau[j] > tau_zero_tol
                          ? psd_clip(w[i][j] / tau[j])
                          : MatrixXcd::Zero(w[i][j].rows(), w[i][j].cols());
    }
    return s;
}

HybridBlock2 build_block2_program(const ChannelSet& cs,
                                  const std::vector<std::vector<MatrixXcd>>& S,
                                  const std::array<double, 3>& tau,
                                  const std::vector<double>& rho,
                                  const std::vector<VectorXcd>& v_t, const NoiseAndPower& np,
                                  const AoOptions& opt) {
    const int k_pairs = cs.k_pairs;
    const int dim = cs.v_dim();
    HybridBlock2 b;
    auto& p = b.program;

    bool any_eh = false;
    for (double e : np.e_req) any_eh = any_eh || e > 0.0;
    b.active = {any_eh && tau[0] > opt.tau_zero_tol, tau[1] > opt.tau_zero_tol,
                tau[2] > opt.tau_zero_tol};

    for (int j = 0; j < 3; ++j) {
        if (!b.active[j]) continue;
        b.v[j] = p.add_complex_vector(dim);
        p.hint(b.v[j], v_t[j]);
        for (int e = 0; e < dim - 1; ++e) {
            conic::CAffine entry;
            const VectorXcd sel = VectorXcd::Unit(dim, e);
            entry.re.add_re_inner(b.v[j], sel);
            entry.im.add_re_inner(b.v[j], std::complex<double>(0, 1) * sel);
            p.require_abs_le(entry, conic::LinExpr(1.0));
        }
        conic::LinExpr last_re(-1.0), last_im;
        last_re.add_re_inner(b.v[j], VectorXcd::Unit(dim, dim - 1));
        last_im.add_re_inner(b.v[j], std::complex<double>(0, 1) * VectorXcd::Unit(dim, dim - 1));
        p.require_eq(last_re);
        p.require_eq(last_im);
    }

    const auto quad_matrix = [&](int i, int k, int j) {
        return MatrixXcd(cs.H[i][k] * S[i][j] * cs.H[i][k].adjoint());
    };
    const auto factor_rows = [&](int i, int k, int j) {
        return MatrixXcd(psd_sqrt(S[i][j]).adjoint() * cs.H[i][k].adjoint());
    };

    std::vector<MatrixXcd> s2(k_pairs), s3(k_pairs);
    for (int i = 0; i < k_pairs; ++i) {
        s2[i] = S[i][1];
        s3[i] = S[i][2];
    }
    // current SINRs are tight, hence feasible, expansion points for mu
    const auto mu2 = sinr_hybrid_slot2(cs, s2, v_t[1], rho, np);
    const auto mu3 = sinr_hybrid_slot3(cs, s3, v_t[2], np);

    b.mu.assign(k_pairs, {conic::VarId{}, conic::VarId{}});
    for (int k = 0; k < k_pairs; ++k) {
        if (b.active[1] && rho[k] > opt.clamp && mu2[k] > opt.sinr_pin_tol) {
            const conic::VarId mu = p.add_scalar(0.0);
            p.hint(mu, mu2[k]);
            b.mu[k][0] = mu;
            conic::LinExpr arg(1.0);
            arg.add(mu, 1.0);
            p.maximize_add_log2(tau[1], arg);
            const auto f = sca::quad_over_lin_lb(quad_matrix(k, k, 1), v_t[1], mu2[k]);
            conic::LinExpr lhs(-np.sigma_ant_sq[k] - np.sigma_proc_sq[k] / rho[k]);
            lhs.add_re_inner(b.v[1], f.x_coef);
            lhs.add(mu, f.y_coef);
            std::vector<conic::CAffine> terms;
            for (int i = 0; i < k_pairs; ++i) {
                if (i == k) continue;
                auto rows = conic::complex_rows(b.v[1], factor_rows(i, k, 1));
                for (auto& r : rows) terms.push_back(std::move(r));
            }
            p.require_quad_le(std::move(terms), lhs);
        }
        if (b.active[2] && mu3[k] > opt.sinr_pin_tol) {
            const conic::VarId mu = p.add_scalar(0.0);
            p.hint(mu, mu3[k]);
            b.mu[k][1] = mu;
            conic::LinExpr arg(1.0);
            arg.add(mu, 1.0);
            p.maximize_add_log2(tau[2], arg);
            const auto f = sca::quad_over_lin_lb(quad_matrix(k, k, 2), v_t[2], mu3[k]);
            conic::LinExpr lhs(-np.sigma_sq(k));
            lhs.add_re_inner(b.v[2], f.x_coef);
            lhs.add(mu, f.y_coef);
            std::vector<conic::CAffine> terms;
            for (int i = 0; i < k_pairs; ++i) {
                if (i == k) continue;
                auto rows = conic::complex_rows(b.v[2], factor_rows(i, k, 2));
                for (auto& r : rows) terms.push_back(std::move(r));
            }
            p.require_quad_le(std::move(terms), lhs);
        }
    }

    for (int k = 0; k < k_pairs; ++k) {
        if (np.e_req[k] <= 0.0) continue;
        conic::LinExpr eh(-np.e_req[k]);
        for (int i = 0; i < k_pairs; ++i) {
            const double c1 = np.zeta * tau[0];
            if (c1 > 0.0) {
                const MatrixXcd a = quad_matrix(i, k, 0);
                if (b.active[0]) {
                    const auto g = sca::quad_lb(a, v_t[0]);
                    eh.add_re_inner(b.v[0], c1 * g.x_coef);
                    eh.add_constant(c1 * g.constant);
                } else {
                    eh.add_constant(c1 * std::real(v_t[0].dot(a * v_t[0])));
                }
            }
            const double c2 = np.zeta * tau[1] * (1.0 - rho[k]);
            if (c2 > 0.0) {
                const MatrixXcd a = quad_matrix(i, k, 1);
                if (b.active[1]) {
                    const auto g = sca::quad_lb(a, v_t[1]);
                    eh.add_re_inner(b.v[1], c2 * g.x_coef);
                    eh.add_constant(c2 * g.constant);
                } else {
                    eh.add_constant(c2 * std::real(v_t[1].dot(a * v_t[1])));
                }
            }
        }
        p.require_ge(eh);
    }
    return b;
}

double hybrid_objective(const ChannelSet& cs, const HybridIterate& it, const NoiseAndPower& np,
                        double tau_zero_tol) {
    return sum_rate(cs, hybrid_solution_from_iterate(cs, it, np, Scheme::hybrid, tau_zero_tol),
                    np);
}

SchemeSolution hybrid_solution_from_iterate(const ChannelSet& cs, const HybridIterate& it,
                                            const NoiseAndPower& np, Scheme scheme,
                                            double tau_zero_tol) {
    SchemeSolution sol;
    sol.scheme = scheme;
    sol.k_pairs = cs.k_pairs;
    sol.m_antennas = cs.m_antennas;
    sol.S = recover_covariances(it.W, it.tau, tau_zero_tol);
    sol.tau = {it.tau[0], it.tau[1], it.tau[2]};
    sol.rho = it.rho;
    sol.v = it.v;
    sol.sum_rate = sum_rate(cs, sol, np);
    sol.harvested = harvested_energy(cs, sol, np);
    return sol;
}

HybridIterate hybrid_iterate_from_solution(const SchemeSolution& sol, const NoiseAndPower& np,
                                           double clamp) {
    (void)np;
    HybridIterate it;
    const int k_pairs = sol.k_pairs;
    it.W.assign(k_pairs, std::vector<MatrixXcd>(3));
    for (int i = 0; i < k_pairs; ++i)
        for (int j = 0; j < 3; ++j) it.W[i][j] = sol.tau[j] * sol.S[i][j];
    it.tau = {sol.tau[0], sol.tau[1], sol.tau[2]};
    it.rho = sol.rho;
    it.v = sol.v;
    it.e.assign(k_pairs, 0.0);
    it.z.assign(k_pairs, 0.0);
    for (int k = 0; k < k_pairs; ++k)
        if (it.tau[1] > 0.0) it.e[k] = it.tau[1] / std::max(it.rho[k], clamp);
    return it;
}

namespace {

HybridIterate extract_block1(const HybridBlock1& b, const conic::SolveResult& r,
                             const HybridIterate& base) {
    HybridIterate cand = base;
    const int k_pairs = static_cast<int>(base.W.size());
    double tau_sum = 0.0;
    for (int j = 0; j < 3; ++j) {
        cand.tau[j] = b.active[j] ? std::max(0.0, r.scalar(b.tau[j])) : 0.0;
        tau_sum += cand.tau[j];
    }
    const double scale = tau_sum > 1.0 ? 1.0 / tau_sum : 1.0;
    for (int j = 0; j < 3; ++j) cand.tau[j] *= scale;
    for (int i = 0; i < k_pairs; ++i)
        for (int j = 0; j < 3; ++j)
            cand.W[i][j] = b.active[j]
                               ? MatrixXcd(scale * psd_clip(r.hermitian(b.w[i][j])))
                               : MatrixXcd::Zero(base.W[i][j].rows(), base.W[i][j].cols());
    for (int k = 0; k < k_pairs; ++k) {
        if (b.active[1]) {
            cand.rho[k] = std::min(std::max(r.scalar(b.rho[k]), 0.0), 1.0);
            cand.e[k] = std::max(r.scalar(b.e[k]), 0.0);
            cand.z[k] = std::max(r.scalar(b.z[k]), 0.0);
        } else {
            cand.rho[k] = 1.0;
            cand.e[k] = 0.0;
            cand.z[k] = 0.0;
        }
    }
    return cand;
}

}  // namespace

SchemeSolution ao_solve_hybrid(const ChannelSet& cs, const NoiseAndPower& np,
                               const AoOptions& opt, HybridVariant variant,
                               const HybridIterate& initial) {
    const std::array<bool, 3> base_active = hybrid_active_slots(variant);
    const Scheme scheme = variant == HybridVariant::ps_only
                              ? Scheme::ps
                              : (variant == HybridVariant::ts_only ? Scheme::ts : Scheme::hybrid);

    HybridIterate it = canonicalize(cs, initial, np, base_active, opt.clamp);
    SchemeSolution cur = hybrid_solution_from_iterate(cs, it, np, scheme, opt.tau_zero_tol);
    if (!constraint_residuals(cs, cur, np).feasible())
        throw std::domain_error("ao_solve_hybrid: infeasible initial point");

    double best = cur.sum_rate;
    std::vector<double> trace{best};
    bool solver_failure = false;

    // The transformed problem needs rho > 0 wherever the PS slot carries
    // time; at the EH feasibility boundary the PS restriction starts (and
    // stays) at its zero-rate operating point.
    if (variant == HybridVariant::ps_only) {
        double rho_min = 1.0;
        for (double r : it.rho) rho_min = std::min(rho_min, r);
        if (rho_min < 1e-6) {
            cur.feasible = true;
            cur.trace = trace;
            return cur;
        }
    }

    conic::WarmStart warm1, warm2;
    double prev_outer = best;
    int outer = 0;
    bool hit_cap = true;

    const auto try_accept = [&](const HybridIterate& cand) {
        SchemeSolution sol = hybrid_solution_from_iterate(cs, cand, np, scheme, opt.tau_zero_tol);
        if (sol.sum_rate >= best && constraint_residuals(cs, sol, np).feasible()) {
            it = cand;
            best = sol.sum_rate;
            return true;
        }
        return false;
    };

    for (outer = 1; outer <= opt.max_outer_iters; ++outer) {
        it = canonicalize(cs, it, np, base_active, opt.clamp);
        try {
            HybridBlock1 b1 = build_block1_program(cs, it, np, opt, base_active);
            const auto r1 = conic::solve(b1.program, opt.solver, warm1.empty() ? nullptr : &warm1);
            if (r1.status == conic::SolveStatus::optimal) {
                warm1 = r1.warm();
                HybridIterate cand = extract_block1(b1, r1, it);
                // slots driven to ~0 re-solve cleanly without their cones
                std::array<bool, 3> reduced = base_active;
                bool any_off = false;
                for (int j = 0; j < 3; ++j)
                    if (reduced[j] && cand.tau[j] <= opt.slot_off_tol) {
                        reduced[j] = false;
                        any_off = true;
                    }
                bool accepted = false;
                if (any_off) {
                    HybridIterate seed = canonicalize(cs, cand, np, reduced, opt.clamp);
                    try {
                        HybridBlock1 b1r = build_block1_program(cs, seed, np, opt, reduced);
                        const auto r1r = conic::solve(b1r.program, opt.solver);
                        if (r1r.status == conic::SolveStatus::optimal)
                            accepted = try_accept(extract_block1(b1r, r1r, seed));
                    } catch (const std::invalid_argument&) {
                    }
                }
                if (!accepted) try_accept(cand);
            } else if (r1.status == conic::SolveStatus::numerical_failure) {
                solver_failure = true;
            }
        } catch (const std::invalid_argument&) {
            solver_failure = true;
        }
        trace.push_back(best);

        if (cs.n_total > 0) {
            try {
                const auto S = recover_covariances(it.W, it.tau, opt.tau_zero_tol);
                HybridBlock2 b2 = build_block2_program(cs, S, it.tau, it.rho, it.v, np, opt);
                if (b2.active[0] || b2.active[1] || b2.active[2]) {
                    const auto r2 =
                        conic::solve(b2.program, opt.solver, warm2.empty() ? nullptr : &warm2);
                    if (r2.status == conic::SolveStatus::optimal) {
                        warm2 = r2.warm();
                        HybridIterate cand = it;
                        for (int j = 0; j < 3; ++j)
                            if (b2.active[j]) cand.v[j] = snap_phases(r2.complex_vector(b2.v[j]));
                        try_accept(cand);
                    } else if (r2.status == conic::SolveStatus::numerical_failure) {
                        solver_failure = true;
                    }
                }
            } catch (const std::invalid_argument&) {
                solver_failure = true;
            }
        }
        trace.push_back(best);

        const double frac = (best - prev_outer) / std::max(prev_outer, 1e-12);
        prev_outer = best;
        if (frac < opt.epsilon) {
            hit_cap = false;
            break;
        }
    }

    SchemeSolution sol = hybrid_solution_from_iterate(cs, it, np, scheme, opt.tau_zero_tol);
    sol.feasible = true;
    sol.sum_rate = best;
    sol.outer_iters = std::min(outer, opt.max_outer_iters);
    sol.trace = std::move(trace);
    sol.hit_iter_cap = hit_cap;
    sol.solver_failure = solver_failure;
    return sol;
}

}  // namespace riswipt
