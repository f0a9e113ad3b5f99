#include "riswipt/feasibility.hpp"

#include <cmath>
#include <limits>

#include "riswipt/rng.hpp"
#include "riswipt/surrogates.hpp"

namespace riswipt {

namespace {

constexpr std::uint64_t kTagV1 = 11;
constexpr std::uint64_t kTagV2 = 12;
constexpr std::uint64_t kTagV3 = 13;
constexpr std::uint64_t kTagTdma = 21;

constexpr double kFeasEps = 1e-4;  // fractional-improvement stop of the feasibility AO
constexpr int kFeasIters = 50;

double beam_power(const VectorXcd& a, const MatrixXcd& s) { return std::real(a.dot(s * a)); }

VectorXcd random_phases(std::uint64_t seed, int dim) {
    Rng rng(seed);
    VectorXcd v(dim);
    for (int e = 0; e + 1 < dim; ++e) v[e] = rng.unit_phase();
    v[dim - 1] = 1.0;
    return v;
}

// full-power MRT covariance toward the effective channel a
MatrixXcd mrt_cov(const VectorXcd& a, double p) {
    const double n2 = a.squaredNorm();
    if (n2 <= 0.0) return MatrixXcd::Zero(a.size(), a.size());
    return (p / n2) * (a * a.adjoint());
}

bool any_eh(const NoiseAndPower& np) {
    for (double e : np.e_req)
        if (e > 0.0) return true;
    return false;
}

}  // namespace

HybridFeasibility hybrid_feasibility(const ChannelSet& cs, const NoiseAndPower& np,
                                     const AoOptions& opt, std::uint64_t seed) {
    const int k_pairs = cs.k_pairs;
    const int m = cs.m_antennas;
    HybridFeasibility rep;

    if (!any_eh(np)) {
        rep.feasible = true;
        rep.delta = std::numeric_limits<double>::infinity();
        rep.s1.assign(k_pairs, MatrixXcd::Zero(m, m));
        rep.v1 = VectorXcd::Ones(cs.v_dim());
        return rep;
    }

    rep.v1 = random_phases(substream(seed, kTagV1), cs.v_dim());
    rep.s1.assign(k_pairs, MatrixXcd::Zero(m, m));
    rep.delta = 0.0;

    for (int round = 0; round < kFeasIters; ++round) {
        // covariance step: maximize the common margin at fixed phases
        double delta_new = rep.delta;
        {
            conic::Program p;
            std::vector<conic::VarId> s_var;
            for (int i = 0; i < k_pairs; ++i) {
                s_var.push_back(p.add_hermitian_psd(m));
                p.hint(s_var[i], rep.s1[i]);
            }
            const conic::VarId delta = p.add_scalar(0.0);
            conic::LinExpr obj;
            obj.add(delta, 1.0);
            p.maximize_add(obj);
            for (int k = 0; k < k_pairs; ++k) {
                if (np.e_req[k] <= 0.0) continue;
                conic::LinExpr eh;
                const auto a_rows = [&] {
                    std::vector<VectorXcd> rows(k_pairs);
                    for (int i = 0; i < k_pairs; ++i)
                        rows[i] = effective_channel(cs.H[i][k], rep.v1);
                    return rows;
                }();
                for (int i = 0; i < k_pairs; ++i)
                    eh.add_re_trace(s_var[i], np.zeta * a_rows[i] * a_rows[i].adjoint());
                eh.add(delta, -np.e_req[k]);
                p.require_ge(eh);
            }
            for (int i = 0; i < k_pairs; ++i) {
                conic::LinExpr pw(np.p_max[i]);
                pw.add_re_trace(s_var[i], -MatrixXcd::Identity(m, m));
                p.require_ge(pw);
            }
            const auto res = conic::solve(p, opt.solver);
            if (res.status != conic::SolveStatus::optimal) {
                rep.solver_flag = true;
                rep.feasible = false;
                return rep;
            }
            delta_new = std::max(rep.delta, res.scalar(delta));
            for (int i = 0; i < k_pairs; ++i) rep.s1[i] = res.hermitian(s_var[i]);
        }

        // phase step: grow the margin through the residual variable
        if (cs.n_total > 0) {
            conic::Program p;
            const conic::VarId v1 = p.add_complex_vector(cs.v_dim());
            p.hint(v1, rep.v1);
            const conic::VarId resid = p.add_scalar(0.0);
            conic::LinExpr obj;
            obj.add(resid, 1.0);
            p.maximize_add(obj);
            const int dim = cs.v_dim();
            for (int e = 0; e < dim - 1; ++e) {
                conic::CAffine entry;
                const VectorXcd sel = VectorXcd::Unit(dim, e);
                entry.re.add_re_inner(v1, sel);
                entry.im.add_re_inner(v1, std::complex<double>(0, 1) * sel);
                p.require_abs_le(entry, conic::LinExpr(1.0));
            }
            conic::LinExpr last_re(-1.0), last_im;
            last_re.add_re_inner(v1, VectorXcd::Unit(dim, dim - 1));
            last_im.add_re_inner(v1, std::complex<double>(0, 1) * VectorXcd::Unit(dim, dim - 1));
            p.require_eq(last_re);
            p.require_eq(last_im);
            for (int k = 0; k < k_pairs; ++k) {
                if (np.e_req[k] <= 0.0) continue;
                conic::LinExpr eh(-delta_new * np.e_req[k]);
                for (int i = 0; i < k_pairs; ++i) {
                    const MatrixXcd a = cs.H[i][k] * rep.s1[i] * cs.H[i][k].adjoint();
                    const auto g = sca::quad_lb(a, rep.v1);
                    eh.add_re_inner(v1, np.zeta * g.x_coef);
                    eh.add_constant(np.zeta * g.constant);
                }
                eh.add(resid, -np.e_req[k]);
                p.require_ge(eh);
            }
            const auto res = conic::solve(p, opt.solver);
            if (res.status == conic::SolveStatus::optimal) {
                VectorXcd v_new = res.complex_vector(v1);
                const int n = dim - 1;
                for (int e = 0; e < n; ++e) {
                    const double mag = std::abs(v_new[e]);
                    if (mag > 1.0) v_new[e] /= mag;
                }
                v_new[n] = 1.0;
                rep.v1 = v_new;
                delta_new += std::max(0.0, res.scalar(resid));
            } else if (res.status == conic::SolveStatus::numerical_failure) {
                rep.solver_flag = true;
            }
        }

        const double frac = (delta_new - rep.delta) / std::max(rep.delta, 1e-12);
        rep.delta = delta_new;
        rep.delta_trace.push_back(rep.delta);
        if (rep.delta >= 1.0 - 1e-9) break;  // feasible: stop per the check's convention
        if (frac < kFeasEps && round > 0) break;
    }

    // recompute the exact attained margin from the witness
    double margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_pairs; ++k) {
        if (np.e_req[k] <= 0.0) continue;
        double q = 0.0;
        for (int i = 0; i < k_pairs; ++i)
            q += np.zeta * beam_power(effective_channel(cs.H[i][k], rep.v1), rep.s1[i]);
        margin = std::min(margin, q / np.e_req[k]);
    }
    rep.delta = margin;
    rep.feasible = margin >= 1.0 - 1e-9;
    return rep;
}

HybridIterate hybrid_initial_point(const HybridFeasibility& report, const ChannelSet& cs,
                                   const NoiseAndPower& np, const AoOptions& opt,
                                   std::uint64_t seed, HybridVariant variant) {
    if (!report.feasible) throw std::domain_error("hybrid_initial_point: infeasible report");
    const int k_pairs = cs.k_pairs;
    const int m = cs.m_antennas;

    HybridIterate it;
    it.W.assign(k_pairs, std::vector<MatrixXcd>(3, MatrixXcd::Zero(m, m)));
    it.rho.assign(k_pairs, 1.0);
    it.e.assign(k_pairs, 0.0);
    it.z.assign(k_pairs, 0.0);
    it.v.resize(3);
    it.v[0] = report.v1;
    it.v[1] = random_phases(substream(seed, kTagV2), cs.v_dim());
    it.v[2] = random_phases(substream(seed, kTagV3), cs.v_dim());

    const double tau1 = std::isinf(report.delta) ? 0.0 : 1.0 / report.delta;

    switch (variant) {
        case HybridVariant::hybrid: {
            it.tau = {tau1, 0.5 * (1.0 - tau1), 0.5 * (1.0 - tau1)};
            for (int i = 0; i < k_pairs; ++i) {
                it.W[i][0] = tau1 * report.s1[i];
                for (int j = 1; j < 3; ++j)
                    it.W[i][j] = it.tau[j] * mrt_cov(effective_channel(cs.H[i][i], it.v[j]),
                                                     np.p_max[i]);
            }
            for (int k = 0; k < k_pairs; ++k)
                it.e[k] = it.tau[1];  // rho = 1
            break;
        }
        case HybridVariant::ps_only: {
            it.tau = {0.0, 1.0, 0.0};
            it.v[1] = report.v1;  // EH-aligned phases carry the whole requirement
            const double rho0 =
                std::isinf(report.delta) ? 1.0 : std::max(0.0, 1.0 - 1.0 / report.delta);
            for (int i = 0; i < k_pairs; ++i) it.W[i][1] = report.s1[i];
            for (int k = 0; k < k_pairs; ++k) {
                it.rho[k] = rho0;
                it.e[k] = 1.0 / std::max(rho0, opt.clamp);
                it.z[k] = std::sqrt(np.e_req[k]);
            }
            break;
        }
        case HybridVariant::ts_only: {
            it.tau = {tau1, 0.0, 1.0 - tau1};
            for (int i = 0; i < k_pairs; ++i) {
                it.W[i][0] = tau1 * report.s1[i];
                it.W[i][2] =
                    it.tau[2] * mrt_cov(effective_channel(cs.H[i][i], it.v[2]), np.p_max[i]);
            }
            break;
        }
    }
    return it;
}

TdmaFeasibility tdma_feasibility(const ChannelSet& cs, const NoiseAndPower& np,
                                 const AoOptions& opt, std::uint64_t seed) {
    const int k_pairs = cs.k_pairs;
    const int m = cs.m_antennas;
    TdmaFeasibility rep;
    rep.witness.W.assign(k_pairs, std::vector<MatrixXcd>(k_pairs, MatrixXcd::Zero(m, m)));
    rep.witness.tau.assign(k_pairs, 0.0);
    rep.witness.v.resize(k_pairs);
    for (int j = 0; j < k_pairs; ++j)
        rep.witness.v[j] = random_phases(substream(seed, kTagTdma + j), cs.v_dim());

    if (!any_eh(np)) {
        rep.feasible = true;
        rep.total_time = 0.0;
        return rep;
    }

    double total = std::numeric_limits<double>::infinity();
    for (int round = 0; round < kFeasIters; ++round) {
        // time-minimization step at fixed phases
        {
            conic::Program p;
            std::vector<std::vector<conic::VarId>> w(k_pairs,
                                                     std::vector<conic::VarId>(k_pairs));
            std::vector<conic::VarId> tau(k_pairs);
            for (int j = 0; j < k_pairs; ++j) {
                tau[j] = p.add_scalar(0.0);
                p.hint(tau[j], rep.witness.tau[j]);
                for (int i = 0; i < k_pairs; ++i) {
                    w[i][j] = p.add_hermitian_psd(m);
                    p.hint(w[i][j], rep.witness.W[i][j]);
                }
            }
            conic::LinExpr obj;
            for (int j = 0; j < k_pairs; ++j) obj.add(tau[j], -1.0);
            p.maximize_add(obj);
            for (int k = 0; k < k_pairs; ++k) {
                if (np.e_req[k] <= 0.0) continue;
                conic::LinExpr eh(-np.e_req[k]);
                for (int j = 0; j < k_pairs; ++j) {
                    if (j == k) continue;
                    for (int i = 0; i < k_pairs; ++i) {
                        const VectorXcd c = effective_channel(cs.H[i][k], rep.witness.v[j]);
                        eh.add_re_trace(w[i][j], np.zeta * c * c.adjoint());
                    }
                }
                p.require_ge(eh);
            }
            for (int j = 0; j < k_pairs; ++j)
                for (int i = 0; i < k_pairs; ++i) {
                    conic::LinExpr pw;
                    pw.add(tau[j], np.p_max[i]);
                    pw.add_re_trace(w[i][j], -MatrixXcd::Identity(m, m));
                    p.require_ge(pw);
                }
            const auto res = conic::solve(p, opt.solver);
            if (res.status != conic::SolveStatus::optimal) {
                rep.solver_flag = true;
                rep.feasible = false;
                return rep;
            }
            total = 0.0;
            for (int j = 0; j < k_pairs; ++j) {
                rep.witness.tau[j] = std::max(0.0, res.scalar(tau[j]));
                total += rep.witness.tau[j];
                for (int i = 0; i < k_pairs; ++i)
                    rep.witness.W[i][j] = res.hermitian(w[i][j]);
            }
        }
        rep.time_trace.push_back(total);
        if (total <= 1.0 + 1e-9) break;  // fits in the interval: feasible

        // phase step: grow a common EH margin at fixed covariances
        if (cs.n_total > 0) {
            conic::Program p;
            std::vector<conic::VarId> v(k_pairs);
            const int dim = cs.v_dim();
            for (int j = 0; j < k_pairs; ++j) {
                v[j] = p.add_complex_vector(dim);
                p.hint(v[j], rep.witness.v[j]);
                for (int e = 0; e < dim - 1; ++e) {
                    conic::CAffine entry;
                    const VectorXcd sel = VectorXcd::Unit(dim, e);
                    entry.re.add_re_inner(v[j], sel);
                    entry.im.add_re_inner(v[j], std::complex<double>(0, 1) * sel);
                    p.require_abs_le(entry, conic::LinExpr(1.0));
                }
                conic::LinExpr last_re(-1.0), last_im;
                last_re.add_re_inner(v[j], VectorXcd::Unit(dim, dim - 1));
                last_im.add_re_inner(v[j],
                                     std::complex<double>(0, 1) * VectorXcd::Unit(dim, dim - 1));
                p.require_eq(last_re);
                p.require_eq(last_im);
            }
            const conic::VarId resid = p.add_scalar(0.0);
            conic::LinExpr obj;
            obj.add(resid, 1.0);
            p.maximize_add(obj);
            for (int k = 0; k < k_pairs; ++k) {
                if (np.e_req[k] <= 0.0) continue;
                conic::LinExpr eh(-np.e_req[k]);
                for (int j = 0; j < k_pairs; ++j) {
                    if (j == k) continue;
                    for (int i = 0; i < k_pairs; ++i) {
                        const MatrixXcd a =
                            cs.H[i][k] * rep.witness.W[i][j] * cs.H[i][k].adjoint();
                        const auto g = sca::quad_lb(a, rep.witness.v[j]);
                        eh.add_re_inner(v[j], np.zeta * g.x_coef);
                        eh.add_constant(np.zeta * g.constant);
                    }
                }
                eh.add(resid, -np.e_req[k]);
                p.require_ge(eh);
            }
            const auto res = conic::solve(p, opt.solver);
            if (res.status == conic::SolveStatus::optimal) {
                for (int j = 0; j < k_pairs; ++j) {
                    VectorXcd vn = res.complex_vector(v[j]);
                    for (int e = 0; e < dim - 1; ++e) {
                        const double mag = std::abs(vn[e]);
                        if (mag > 1.0) vn[e] /= mag;
                    }
                    vn[dim - 1] = 1.0;
                    rep.witness.v[j] = vn;
                }
            } else if (res.status == conic::SolveStatus::numerical_failure) {
                rep.solver_flag = true;
            }
        } else {
            break;  // nothing left to alternate over
        }

        if (rep.time_trace.size() >= 2) {
            const double prev = rep.time_trace[rep.time_trace.size() - 2];
            if ((prev - total) / std::max(prev, 1e-12) < kFeasEps) break;
        }
    }

    rep.total_time = total;
    rep.feasible = total <= 1.0 + 1e-9;
    return rep;
}

TdmaIterate tdma_initial_point(const TdmaFeasibility& report, const ChannelSet& cs,
                               const NoiseAndPower& np, std::uint64_t seed) {
    if (!report.feasible) throw std::domain_error("tdma_initial_point: infeasible report");
    const int k_pairs = cs.k_pairs;
    TdmaIterate it = report.witness;

    if (report.total_time <= 0.0) {
        // no EH burden: uniform slots with own-link MRT at full power
        for (int j = 0; j < k_pairs; ++j) {
            it.tau[j] = 1.0 / k_pairs;
            for (int i = 0; i < k_pairs; ++i) {
                const VectorXcd b = effective_channel(cs.H[i][i], it.v[j]);
                const double n2 = b.squaredNorm();
                it.W[i][j] = i == j && n2 > 0.0
                                 ? MatrixXcd(it.tau[j] * (np.p_max[i] / n2) * b * b.adjoint())
                                 : MatrixXcd::Zero(cs.m_antennas, cs.m_antennas);
            }
        }
        return it;
    }

    // distribute leftover time proportionally; scaling W with tau keeps S and
    // scales the harvested energy up
    const double scale = 1.0 / std::min(report.total_time, 1.0);
    (void)seed;
    if (scale > 1.0) {
        for (int j = 0; j < k_pairs; ++j) {
            it.tau[j] *= scale;
            for (int i = 0; i < k_pairs; ++i) it.W[i][j] *= scale;
        }
    }
    return it;
}

}  // namespace riswipt
