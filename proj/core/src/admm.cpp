#include "admm.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <vector>

namespace riswipt::conic::detail {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Rows of one cone must share a scale so membership survives equilibration;
// zero/nonneg rows scale independently.
std::vector<std::pair<int, int>> row_groups(const ConeSpec& k) {
    std::vector<std::pair<int, int>> g;
    int at = 0;
    for (int i = 0; i < k.zero + k.nonneg; ++i) g.emplace_back(at++, 1);
    for (int d : k.soc) {
        g.emplace_back(at, d);
        at += d;
    }
    for (int d : k.herm) {
        g.emplace_back(at, d * d);
        at += d * d;
    }
    for (int e = 0; e < k.exp_cones; ++e) {
        g.emplace_back(at, 3);
        at += 3;
    }
    return g;
}

struct Scaling {
    VectorXd d_row, e_col;
    double beta = 1.0, gamma = 1.0;
};

Scaling ruiz_equilibrate(MatrixXd& a, VectorXd& b, VectorXd& c, const ConeSpec& k, int iters) {
    const int m = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
    Scaling sc;
    sc.d_row = VectorXd::Ones(m);
    sc.e_col = VectorXd::Ones(n);
    const auto groups = row_groups(k);
    for (int it = 0; it < iters; ++it) {
        VectorXd dr = VectorXd::Ones(m);
        for (const auto& [start, len] : groups) {
            const double mx = a.middleRows(start, len).cwiseAbs().maxCoeff();
            if (mx > 1e-12) dr.segment(start, len).setConstant(1.0 / std::sqrt(mx));
        }
        a = dr.asDiagonal() * a;
        sc.d_row = sc.d_row.cwiseProduct(dr);
        VectorXd ec = VectorXd::Ones(n);
        for (int j = 0; j < n; ++j) {
            const double mx = a.col(j).cwiseAbs().maxCoeff();
            if (mx > 1e-12) ec[j] = 1.0 / std::sqrt(mx);
        }
        a = a * ec.asDiagonal();
        sc.e_col = sc.e_col.cwiseProduct(ec);
    }
    b = sc.d_row.cwiseProduct(b);
    c = sc.e_col.cwiseProduct(c);
    sc.beta = 1.0 / std::max(b.norm(), 1e-9);
    sc.gamma = 1.0 / std::max(c.norm(), 1e-9);
    b *= sc.beta;
    c *= sc.gamma;
    return sc;
}

struct Candidate {
    VectorXd x, y, s;
    double pres = 1e300, dres = 1e300, gap = 1e300, pobj = 0.0;
    double score() const { return std::max({pres, dres, gap}); }
};

// Type-II Anderson acceleration with restart-on-rejection safeguarding.
class Anderson {
public:
    explicit Anderson(int memory) : memory_(memory) {}

    void push(const VectorXd& z, const VectorXd& f) {
        if (memory_ <= 0) return;
        zs_.push_back(z);
        fs_.push_back(f);
        if (static_cast<int>(zs_.size()) > memory_ + 1) {
            zs_.erase(zs_.begin());
            fs_.erase(fs_.begin());
        }
    }

    void reset() {
        zs_.clear();
        fs_.clear();
    }

    // Extrapolated point or empty when history is insufficient.
    VectorXd propose() const {
        const int h = static_cast<int>(zs_.size()) - 1;
        if (memory_ <= 0 || h < 1) return {};
        const int dim = static_cast<int>(zs_.back().size());
        MatrixXd df(dim, h), dz(dim, h);
        for (int i = 0; i < h; ++i) {
            df.col(i) = fs_[i + 1] - fs_[i];
            dz.col(i) = zs_[i + 1] - zs_[i];
        }
        // regularized least squares: gamma = argmin ||f_k - dF g||
        MatrixXd gram = df.transpose() * df;
        gram.diagonal().array() += 1e-12 * std::max(1.0, gram.trace());
        const VectorXd gamma = gram.ldlt().solve(df.transpose() * fs_.back());
        return zs_.back() + fs_.back() - (dz + df) * gamma;
    }

private:
    int memory_;
    std::vector<VectorXd> zs_, fs_;
};

}  // namespace

AdmmSolution solve_conic(const ConicData& data, const AdmmSettings& st, const AdmmSolution* warm) {
    const int n = static_cast<int>(data.A.cols());
    const int m = static_cast<int>(data.A.rows());
    AdmmSolution out;
    if (m != data.cones.rows() || m != data.b.size() || n != data.c.size()) return out;

    MatrixXd a = data.A;
    VectorXd b = data.b, c = data.c;
    const Scaling sc = ruiz_equilibrate(a, b, c, data.cones, st.ruiz_iters);

    // Cached pieces of the (I + Q) solve: M = [[I, A'], [-A, I]] and h = (c; b).
    const MatrixXd ata = MatrixXd::Identity(n, n) + a.transpose() * a;
    const Eigen::LLT<MatrixXd> llt(ata);
    if (llt.info() != Eigen::Success) return out;
    VectorXd h(n + m);
    h << c, b;
    const auto solve_m = [&](const VectorXd& r) {
        VectorXd z(n + m);
        z.head(n) = llt.solve(r.head(n) - a.transpose() * r.tail(m));
        z.tail(m) = r.tail(m) + a * z.head(n);
        return z;
    };
    const VectorXd g = solve_m(h);
    const double denom = 1.0 + h.dot(g);

    VectorXd u = VectorXd::Zero(n + m + 1), v = VectorXd::Zero(n + m + 1);
    if (warm != nullptr && warm->x.size() == n && warm->y.size() == m && warm->s.size() == m) {
        u.head(n) = sc.beta * warm->x.cwiseQuotient(sc.e_col);
        u.segment(n, m) = sc.gamma * warm->y.cwiseQuotient(sc.d_row);
        u[n + m] = 1.0;
        v.segment(n, m) = sc.beta * sc.d_row.cwiseProduct(warm->s);
    } else {
        u[n + m] = 1.0;
        v[n + m] = 1.0;
    }

    std::vector<ExpState> exp_warm;
    const double bnorm = data.b.norm(), cnorm = data.c.norm();
    Candidate best;
    AdmmStatus status = AdmmStatus::max_iters;
    int iter = 0;

    const auto unscale_x = [&](const VectorXd& xs) {
        return VectorXd(xs.cwiseProduct(sc.e_col) / sc.beta);
    };
    const auto unscale_y = [&](const VectorXd& ys) {
        return VectorXd(ys.cwiseProduct(sc.d_row) / sc.gamma);
    };
    const auto unscale_s = [&](const VectorXd& ss) {
        return VectorXd(ss.cwiseQuotient(sc.d_row) / sc.beta);
    };

    // One pass of the splitting: (u, v) -> (u2, v2).
    const auto apply_t = [&](const VectorXd& uu, const VectorXd& vv, VectorXd& u2, VectorXd& v2) {
        const VectorXd w = uu + vv;
        // (I + Q) ut = w via Sherman-Morrison on M + h h'.
        VectorXd rhs = w.head(n + m) - w[n + m] * h;
        const VectorXd p = solve_m(rhs);
        VectorXd ut(n + m + 1);
        ut.head(n + m) = p - g * (h.dot(p) / denom);
        ut[n + m] = w[n + m] + h.dot(ut.head(n + m));

        ut = st.alpha * ut + (1.0 - st.alpha) * uu;
        u2 = ut - vv;
        project_dual_cones(u2.segment(n, m), data.cones, exp_warm);
        u2[n + m] = std::max(u2[n + m], 0.0);
        v2 = vv - ut + u2;
    };

    // T is positively homogeneous, so iterates may be renormalized freely;
    // this keeps infeasibility certificates from collapsing into the trivial
    // fixed point at the origin and makes residual norms comparable.
    const double znorm_target = std::sqrt(2.0 * (n + m + 1));
    const auto normalize = [&](VectorXd& a_, VectorXd& b_) {
        const double nz = std::sqrt(a_.squaredNorm() + b_.squaredNorm());
        if (nz > 1e-300) {
            a_ *= znorm_target / nz;
            b_ *= znorm_target / nz;
        }
    };

    Anderson aa(st.aa_memory);
    VectorXd zu = u, zv = v;       // pre-step state fed to T
    normalize(zu, zv);
    VectorXd fb_u, fb_v;           // plain successor, fallback when AA regresses
    double safeguard_ref = 1e300;
    bool last_was_aa = false;

    for (iter = 1; iter <= st.max_iters; ++iter) {
        VectorXd tu, tv;
        apply_t(zu, zv, tu, tv);
        const double fnorm =
            std::sqrt((tu - zu).squaredNorm() + (tv - zv).squaredNorm());
        if (last_was_aa && (!std::isfinite(fnorm) || fnorm > safeguard_ref)) {
            zu = fb_u;  // the accelerated point regressed: back to the plain path
            zv = fb_v;
            aa.reset();
            last_was_aa = false;
            continue;
        }
        u = tu;
        v = tv;
        {
            VectorXd z(2 * (n + m + 1)), f(2 * (n + m + 1));
            z << zu, zv;
            f << tu - zu, tv - zv;
            aa.push(z, f);
        }
        const VectorXd zaa = aa.propose();
        if (zaa.size() > 0) {
            fb_u = tu;
            fb_v = tv;
            normalize(fb_u, fb_v);
            safeguard_ref = fnorm;
            zu = zaa.head(n + m + 1);
            zv = zaa.tail(n + m + 1);
            last_was_aa = true;
        } else {
            zu = tu;
            zv = tv;
            last_was_aa = false;
        }
        normalize(zu, zv);

        if (iter % st.check_interval != 0 && iter != st.max_iters) continue;
        if (!u.allFinite() || !v.allFinite()) {
            status = AdmmStatus::failure;
            break;
        }

        const double tau = u[n + m];
        if (tau > 1e-11) {
            Candidate cand;
            cand.x = unscale_x(u.head(n) / tau);
            cand.y = unscale_y(u.segment(n, m) / tau);
            cand.s = unscale_s(v.segment(n, m) / tau);
            const double ctx = data.c.dot(cand.x), bty = data.b.dot(cand.y);
            cand.pres = (data.A * cand.x + cand.s - data.b).norm() / (1.0 + bnorm);
            cand.dres = (data.A.transpose() * cand.y + data.c).norm() / (1.0 + cnorm);
            cand.gap = std::abs(ctx + bty) / (1.0 + std::abs(ctx) + std::abs(bty));
            cand.pobj = ctx;
            if (cand.score() < best.score()) best = cand;
            if (cand.pres <= st.eps && cand.dres <= st.eps && cand.gap <= st.eps) {
                status = AdmmStatus::optimal;
                break;
            }
        }

        // Certificates from the raw (un-normalized) iterate.
        const VectorXd y_cert = unscale_y(u.segment(n, m));
        const double bty_cert = data.b.dot(y_cert);
        if (bty_cert < -1e-12) {
            const double res = (data.A.transpose() * y_cert).norm() * std::max(bnorm, 1.0);
            if (res <= -bty_cert * st.infeas_eps * 1e3) {
                status = AdmmStatus::infeasible;
                break;
            }
        }
        const VectorXd x_cert = unscale_x(u.head(n));
        const double ctx_cert = data.c.dot(x_cert);
        if (ctx_cert < -1e-12) {
            const VectorXd s_cert = unscale_s(v.segment(n, m));
            const double res = (data.A * x_cert + s_cert).norm() * std::max(cnorm, 1.0);
            if (res <= -ctx_cert * st.infeas_eps * 1e3) {
                status = AdmmStatus::unbounded;
                break;
            }
        }
    }

    out.status = status;
    out.iters = std::min(iter, st.max_iters);
    out.x = best.x;
    out.y = best.y;
    out.s = best.s;
    out.primal_res = best.pres;
    out.dual_res = best.dres;
    out.gap = best.gap;
    out.pobj = best.pobj;
    if (status == AdmmStatus::max_iters && best.x.size() == 0) out.status = AdmmStatus::failure;
    return out;
}

}  // namespace riswipt::conic::detail
