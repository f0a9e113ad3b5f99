#include "riswipt/scheme_tdma.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "riswipt/surrogates.hpp"

namespace riswipt {

namespace {

constexpr double kLn2 = 0.6931471805599453;

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

std::vector<std::vector<VectorXcd>> effective_rows(const ChannelSet& cs, const VectorXcd& v) {
    std::vector<std::vector<VectorXcd>> a(cs.k_pairs, std::vector<VectorXcd>(cs.k_pairs));
    for (int i = 0; i < cs.k_pairs; ++i)
        for (int k = 0; k < cs.k_pairs; ++k) a[i][k] = effective_channel(cs.H[i][k], v);
    return a;
}

}  // namespace

double TdmaQ::eval(const std::vector<MatrixXcd>& s_slot_k) const {
    double out = constant;
    for (std::size_t i = 0; i < s_coef.size(); ++i)
        out += std::real((s_coef[i] * s_slot_k[i]).trace());
    return out;
}

double tdma_q_exact(const std::vector<VectorXcd>& b_k, int k,
                    const std::vector<MatrixXcd>& s_slot_k, double sigma_sq) {
    double intf = 0.0;
    for (std::size_t i = 0; i < b_k.size(); ++i)
        if (static_cast<int>(i) != k) intf += beam_power(b_k[i], s_slot_k[i]);
    return std::log2(intf + sigma_sq);
}

TdmaQ surrogate_q(const std::vector<VectorXcd>& b_k, int k,
                  const std::vector<MatrixXcd>& s_t, double sigma_sq) {
    TdmaQ out;
    const int n = static_cast<int>(b_k.size());
    double intf = 0.0;
    for (int i = 0; i < n; ++i)
        if (i != k) intf += beam_power(b_k[i], s_t[i]);
    out.lambda = intf + sigma_sq;
    if (!(out.lambda > 0.0)) throw std::invalid_argument("surrogate_q: nonpositive Lambda");
    const double inv = 1.0 / (out.lambda * kLn2);
    out.s_coef.assign(n, MatrixXcd());
    for (int i = 0; i < n; ++i)
        out.s_coef[i] = i == k ? MatrixXcd::Zero(s_t[i].rows(), s_t[i].cols())
                               : MatrixXcd(inv * b_k[i] * b_k[i].adjoint());
    out.constant = std::log2(out.lambda) - intf * inv;
    return out;
}

TdmaBlock1 build_covariance_sdp(const ChannelSet& cs, const TdmaIterate& it,
                                const NoiseAndPower& np, const AoOptions& opt,
                                TdmaVariant variant, const std::vector<bool>& active) {
    const int k_pairs = cs.k_pairs;
    const int m = cs.m_antennas;
    TdmaBlock1 b;
    b.active = active;
    auto& p = b.program;

    b.w.assign(k_pairs, std::vector<conic::VarId>(k_pairs));
    b.tau.assign(k_pairs, conic::VarId{});
    for (int j = 0; j < k_pairs; ++j) {
        if (!active[j]) continue;
        b.tau[j] = p.add_scalar(0.0);
        p.hint(b.tau[j], it.tau[j]);
        for (int i = 0; i < k_pairs; ++i) {
            b.w[i][j] = p.add_hermitian_psd(m);
            p.hint(b.w[i][j], it.W[i][j]);
        }
    }

    // expansion covariances S^r = W^r / tau^r for the interference surrogate
    const auto s_r = recover_covariances_tdma(it.W, it.tau, opt.tau_zero_tol);

    for (int k = 0; k < k_pairs; ++k) {
        if (!active[k]) continue;
        const auto bk_rows = effective_rows(cs, it.v[k]);
        std::vector<VectorXcd> b_k(k_pairs);
        std::vector<MatrixXcd> s_slot(k_pairs);
        for (int i = 0; i < k_pairs; ++i) {
            b_k[i] = bk_rows[i][k];
            s_slot[i] = s_r[i][k];
        }

        if (variant == TdmaVariant::tdma) {
            conic::LinExpr y;
            for (int i = 0; i < k_pairs; ++i)
                y.add_re_trace(b.w[i][k], b_k[i] * b_k[i].adjoint());
            y.add(b.tau[k], np.sigma_sq(k));
            p.maximize_add_perspective_log2(b.tau[k], y);

            const TdmaQ q = surrogate_q(b_k, k, s_slot, np.sigma_sq(k));
            // tau_k q_ub = tau_k (const + sum tr(coef S^r)) + sum tr(coef (W_{i,k} - tau_k S^r))
            //            = tau_coef * tau_k + sum tr(coef W_{i,k}) with the S^r parts folded in
            conic::LinExpr neg;
            double tau_coef = q.constant;
            for (int i = 0; i < k_pairs; ++i) {
                if (i == k) continue;
                neg.add_re_trace(b.w[i][k], -q.s_coef[i]);
                tau_coef -= std::real((q.s_coef[i] * s_slot[i]).trace());
            }
            neg.add(b.tau[k], -tau_coef);
            p.maximize_add(neg);
        } else {
            // interference-free rate: hidden convexity, no surrogate needed
            conic::LinExpr y;
            y.add_re_trace(b.w[k][k], b_k[k] * b_k[k].adjoint());
            y.add(b.tau[k], np.sigma_sq(k));
            p.maximize_add_perspective_log2(b.tau[k], y);
            conic::LinExpr noise_term;
            noise_term.add(b.tau[k], -std::log2(np.sigma_sq(k)));
            p.maximize_add(noise_term);
        }
    }

    for (int k = 0; k < k_pairs; ++k) {
        if (np.e_req[k] <= 0.0) continue;
        conic::LinExpr eh(-np.e_req[k]);
        for (int j = 0; j < k_pairs; ++j) {
            if (j == k || !active[j]) continue;
            const auto c_rows = effective_rows(cs, it.v[j]);
            for (int i = 0; i < k_pairs; ++i)
                eh.add_re_trace(b.w[i][j], np.zeta * c_rows[i][k] * c_rows[i][k].adjoint());
        }
        p.require_ge(eh);
    }

    for (int j = 0; j < k_pairs; ++j) {
        if (!active[j]) continue;
        for (int i = 0; i < k_pairs; ++i) {
            conic::LinExpr pw;
            pw.add(b.tau[j], np.p_max[i]);
            pw.add_re_trace(b.w[i][j], -MatrixXcd::Identity(m, m));
            p.require_ge(pw);
        }
    }
    conic::LinExpr time(1.0);
    for (int j = 0; j < k_pairs; ++j)
        if (active[j]) time.add(b.tau[j], -1.0);
    p.require_ge(time);
    return b;
}

TdmaBlock2 build_phase_qcqp(const ChannelSet& cs, const std::vector<std::vector<MatrixXcd>>& S,
                            const std::vector<double>& tau, const std::vector<VectorXcd>& v_t,
                            const NoiseAndPower& np, const AoOptions& opt, TdmaVariant variant) {
    const int k_pairs = cs.k_pairs;
    const int dim = cs.v_dim();
    TdmaBlock2 b;
    auto& p = b.program;

    b.active.assign(k_pairs, false);
    for (int j = 0; j < k_pairs; ++j) b.active[j] = tau[j] > opt.tau_zero_tol;

    b.v.assign(k_pairs, conic::VarId{});
    for (int j = 0; j < k_pairs; ++j) {
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

    const auto gamma = variant == TdmaVariant::tdma ? sinr_tdma(cs, S, v_t, np)
                                                    : sinr_tdma_d(cs, S, v_t, np);

    b.mu.assign(k_pairs, conic::VarId{});
    for (int k = 0; k < k_pairs; ++k) {
        if (!b.active[k] || gamma[k] <= opt.sinr_pin_tol) continue;
        const conic::VarId mu = p.add_scalar(0.0);
        p.hint(mu, gamma[k]);
        b.mu[k] = mu;
        conic::LinExpr arg(1.0);
        arg.add(mu, 1.0);
        p.maximize_add_log2(tau[k], arg);

        if (variant == TdmaVariant::tdma) {
            const auto f = sca::quad_over_lin_lb(quad_matrix(k, k, k), v_t[k], gamma[k]);
            conic::LinExpr lhs(-np.sigma_sq(k));
            lhs.add_re_inner(b.v[k], f.x_coef);
            lhs.add(mu, f.y_coef);
            std::vector<conic::CAffine> terms;
            for (int i = 0; i < k_pairs; ++i) {
                if (i == k) continue;
                auto rows = conic::complex_rows(b.v[k], factor_rows(i, k, k));
                for (auto& r : rows) terms.push_back(std::move(r));
            }
            p.require_quad_le(std::move(terms), lhs);
        } else {
            const auto g = sca::quad_lb(quad_matrix(k, k, k), v_t[k]);
            conic::LinExpr lhs(g.constant);
            lhs.add_re_inner(b.v[k], g.x_coef);
            lhs.add(mu, -np.sigma_sq(k));
            p.require_ge(lhs);
        }
    }

    for (int k = 0; k < k_pairs; ++k) {
        if (np.e_req[k] <= 0.0) continue;
        conic::LinExpr eh(-np.e_req[k]);
        for (int j = 0; j < k_pairs; ++j) {
            if (j == k) continue;
            const double c = np.zeta * tau[j];
            if (c <= 0.0) continue;
            for (int i = 0; i < k_pairs; ++i) {
                const MatrixXcd a = quad_matrix(i, k, j);
                if (b.active[j]) {
                    const auto g = sca::quad_lb(a, v_t[j]);
                    eh.add_re_inner(b.v[j], c * g.x_coef);
                    eh.add_constant(c * g.constant);
                } else {
                    eh.add_constant(c * std::real(v_t[j].dot(a * v_t[j])));
                }
            }
        }
        p.require_ge(eh);
    }
    return b;
}

std::vector<std::vector<MatrixXcd>> recover_covariances_tdma(
    const std::vector<std::vector<MatrixXcd>>& w, const std::vector<double>& tau,
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

SchemeSolution tdma_solution_from_iterate(const ChannelSet& cs, const TdmaIterate& it,
                                          const NoiseAndPower& np, Scheme scheme,
                                          double tau_zero_tol) {
    SchemeSolution sol;
    sol.scheme = scheme;
    sol.k_pairs = cs.k_pairs;
    sol.m_antennas = cs.m_antennas;
    sol.S = recover_covariances_tdma(it.W, it.tau, tau_zero_tol);
    sol.tau = it.tau;
    sol.v = it.v;
    sol.sum_rate = sum_rate(cs, sol, np);
    sol.harvested = harvested_energy(cs, sol, np);
    return sol;
}

TdmaIterate tdma_iterate_from_solution(const SchemeSolution& sol) {
    TdmaIterate it;
    const int k_pairs = sol.k_pairs;
    it.W.assign(k_pairs, std::vector<MatrixXcd>(k_pairs));
    for (int i = 0; i < k_pairs; ++i)
        for (int j = 0; j < k_pairs; ++j) it.W[i][j] = sol.tau[j] * sol.S[i][j];
    it.tau = sol.tau;
    it.v = sol.v;
    return it;
}

namespace {

TdmaIterate canonicalize(TdmaIterate it, const std::vector<bool>& active) {
    for (auto& vj : it.v) vj = snap_phases(std::move(vj));
    for (std::size_t j = 0; j < it.tau.size(); ++j)
        if (!active[j]) {
            it.tau[j] = 0.0;
            for (auto& wi : it.W) wi[j].setZero();
        }
    return it;
}

TdmaIterate extract_block1(const TdmaBlock1& b, const conic::SolveResult& r,
                           const TdmaIterate& base) {
    TdmaIterate cand = base;
    const int k_pairs = static_cast<int>(base.tau.size());
    double tau_sum = 0.0;
    for (int j = 0; j < k_pairs; ++j) {
        cand.tau[j] = b.active[j] ? std::max(0.0, r.scalar(b.tau[j])) : 0.0;
        tau_sum += cand.tau[j];
    }
    const double scale = tau_sum > 1.0 ? 1.0 / tau_sum : 1.0;
    for (int j = 0; j < k_pairs; ++j) cand.tau[j] *= scale;
    for (int i = 0; i < k_pairs; ++i)
        for (int j = 0; j < k_pairs; ++j)
            cand.W[i][j] = b.active[j]
                               ? MatrixXcd(scale * psd_clip(r.hermitian(b.w[i][j])))
                               : MatrixXcd::Zero(base.W[i][j].rows(), base.W[i][j].cols());
    return cand;
}

}  // namespace

SchemeSolution ao_solve_tdma(const ChannelSet& cs, const NoiseAndPower& np, const AoOptions& opt,
                             TdmaVariant variant, const TdmaIterate& initial) {
    const int k_pairs = cs.k_pairs;
    const Scheme scheme = variant == TdmaVariant::tdma ? Scheme::tdma : Scheme::tdma_d;
    std::vector<bool> base_active(k_pairs, true);

    TdmaIterate it = canonicalize(initial, base_active);
    SchemeSolution cur = tdma_solution_from_iterate(cs, it, np, scheme, opt.tau_zero_tol);
    if (!constraint_residuals(cs, cur, np).feasible())
        throw std::domain_error("ao_solve_tdma: infeasible initial point");

    double best = cur.sum_rate;
    std::vector<double> trace{best};
    bool solver_failure = false;
    conic::WarmStart warm1, warm2;
    double prev_outer = best;
    int outer = 0;
    bool hit_cap = true;

    const auto try_accept = [&](const TdmaIterate& cand) {
        SchemeSolution sol = tdma_solution_from_iterate(cs, cand, np, scheme, opt.tau_zero_tol);
        if (sol.sum_rate >= best && constraint_residuals(cs, sol, np).feasible()) {
            it = cand;
            best = sol.sum_rate;
            return true;
        }
        return false;
    };

    for (outer = 1; outer <= opt.max_outer_iters; ++outer) {
        it = canonicalize(it, base_active);
        try {
            TdmaBlock1 b1 = build_covariance_sdp(cs, it, np, opt, variant, base_active);
            const auto r1 = conic::solve(b1.program, opt.solver, warm1.empty() ? nullptr : &warm1);
            if (r1.status == conic::SolveStatus::optimal) {
                warm1 = r1.warm();
                TdmaIterate cand = extract_block1(b1, r1, it);
                std::vector<bool> reduced = base_active;
                bool any_off = false;
                for (int j = 0; j < k_pairs; ++j)
                    if (reduced[j] && cand.tau[j] <= opt.slot_off_tol) {
                        reduced[j] = false;
                        any_off = true;
                    }
                bool accepted = false;
                if (any_off) {
                    TdmaIterate seed = canonicalize(cand, reduced);
                    try {
                        TdmaBlock1 b1r = build_covariance_sdp(cs, seed, np, opt, variant, reduced);
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
                const auto S = recover_covariances_tdma(it.W, it.tau, opt.tau_zero_tol);
                TdmaBlock2 b2 = build_phase_qcqp(cs, S, it.tau, it.v, np, opt, variant);
                bool any_active = false;
                for (bool a : b2.active) any_active = any_active || a;
                if (any_active) {
                    const auto r2 =
                        conic::solve(b2.program, opt.solver, warm2.empty() ? nullptr : &warm2);
                    if (r2.status == conic::SolveStatus::optimal) {
                        warm2 = r2.warm();
                        TdmaIterate cand = it;
                        for (int j = 0; j < k_pairs; ++j)
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

    SchemeSolution sol = tdma_solution_from_iterate(cs, it, np, scheme, opt.tau_zero_tol);
    sol.feasible = true;
    sol.sum_rate = best;
    sol.outer_iters = std::min(outer, opt.max_outer_iters);
    sol.trace = std::move(trace);
    sol.hit_iter_cap = hit_cap;
    sol.solver_failure = solver_failure;
    return sol;
}

}  // namespace riswipt
