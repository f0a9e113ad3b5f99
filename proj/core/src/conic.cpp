#include "riswipt/conic.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "admm.hpp"

namespace riswipt::conic {

namespace {
constexpr double kLn2 = 0.6931471805599453;
constexpr double kSqrt2 = 1.4142135623730951;

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string("non-finite ") + what);
}
}  // namespace

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::numerical_failure: return "numerical_failure";
    }
    return "?";
}

LinExpr& LinExpr::add(VarId scalar, double coef) {
    check_finite(coef, "scalar coefficient");
    scalars_.emplace_back(scalar, coef);
    return *this;
}

LinExpr& LinExpr::add_re_inner(VarId cvec, VectorXcd coef) {
    if (!coef.allFinite()) throw std::invalid_argument("non-finite vector coefficient");
    vectors_.emplace_back(cvec, std::move(coef));
    return *this;
}

LinExpr& LinExpr::add_re_trace(VarId herm, MatrixXcd coef) {
    if (!coef.allFinite()) throw std::invalid_argument("non-finite matrix coefficient");
    matrices_.emplace_back(herm, std::move(coef));
    return *this;
}

LinExpr& LinExpr::add(const LinExpr& other, double scale) {
    check_finite(scale, "scale");
    c0_ += scale * other.c0_;
    for (const auto& [id, c] : other.scalars_) scalars_.emplace_back(id, scale * c);
    for (const auto& [id, c] : other.vectors_) vectors_.emplace_back(id, VectorXcd(scale * c));
    for (const auto& [id, c] : other.matrices_) matrices_.emplace_back(id, MatrixXcd(scale * c));
    return *this;
}

std::vector<CAffine> complex_rows(VarId cvec, const MatrixXcd& L, const VectorXcd& c0) {
    std::vector<CAffine> rows(static_cast<std::size_t>(L.rows()));
    for (int r = 0; r < L.rows(); ++r) {
        // row = sum_e L(r,e) v_e + c0_r; Re part uses conj pairing of add_re_inner
        CAffine& ca = rows[static_cast<std::size_t>(r)];
        ca.re.add_re_inner(cvec, L.row(r).conjugate().transpose());
        // Im(L v) = Re(-i L v) = Re((i L)^H^H ...): coefficient conj(i*L_r) = -i*conj(L_r)
        ca.im.add_re_inner(cvec, std::complex<double>(0, 1) * L.row(r).conjugate().transpose());
        if (c0.size() > 0) {
            ca.re.add_constant(std::real(c0[r]));
            ca.im.add_constant(std::imag(c0[r]));
        }
    }
    return rows;
}

VarId Program::add_scalar(double lb, double ub) {
    vars_.push_back({0, 1, lb, ub});
    return {static_cast<int>(vars_.size()) - 1};
}

VarId Program::add_complex_vector(int dim) {
    if (dim < 1) throw std::invalid_argument("complex vector dim must be >= 1");
    vars_.push_back({1, dim, 0.0, 0.0});
    return {static_cast<int>(vars_.size()) - 1};
}

VarId Program::add_hermitian_psd(int dim) {
    if (dim < 1) throw std::invalid_argument("hermitian dim must be >= 1");
    vars_.push_back({2, dim, 0.0, 0.0});
    return {static_cast<int>(vars_.size()) - 1};
}

void Program::check_scalar(VarId id) const {
    if (!id.valid() || id.index >= static_cast<int>(vars_.size()) || vars_[id.index].kind != 0)
        throw std::invalid_argument("expected a declared scalar variable");
}

void Program::hint(VarId id, double value) { scalar_hints_.emplace_back(id, value); }
void Program::hint(VarId id, const VectorXcd& value) { vector_hints_.emplace_back(id, value); }
void Program::hint(VarId id, const MatrixXcd& value) { matrix_hints_.emplace_back(id, value); }

void Program::require_eq(LinExpr expr) { eqs_.push_back(std::move(expr)); }
void Program::require_ge(LinExpr expr) { ges_.push_back(std::move(expr)); }

void Program::require_quad_le(std::vector<CAffine> terms, LinExpr rhs) {
    // sum |terms|^2 <= rhs  <=>  ||[2*terms; rhs-1]|| <= rhs+1
    SocCon con;
    LinExpr head = rhs;
    head.add_constant(1.0);
    con.rows.push_back(std::move(head));
    for (auto& t : terms) {
        LinExpr re, im;
        re.add(t.re, 2.0);
        im.add(t.im, 2.0);
        con.rows.push_back(std::move(re));
        con.rows.push_back(std::move(im));
    }
    LinExpr tail = std::move(rhs);
    tail.add_constant(-1.0);
    con.rows.push_back(std::move(tail));
    socs_.push_back(std::move(con));
}

void Program::require_prod_ge(LinExpr u, LinExpr w, std::vector<CAffine> terms) {
    // u*w >= sum |terms|^2, u,w >= 0  <=>  ||[2*terms; u-w]|| <= u+w
    SocCon con;
    LinExpr head;
    head.add(u, 1.0).add(w, 1.0);
    con.rows.push_back(std::move(head));
    for (auto& t : terms) {
        LinExpr re, im;
        re.add(t.re, 2.0);
        im.add(t.im, 2.0);
        con.rows.push_back(std::move(re));
        con.rows.push_back(std::move(im));
    }
    LinExpr tail;
    tail.add(u, 1.0).add(w, -1.0);
    con.rows.push_back(std::move(tail));
    socs_.push_back(std::move(con));
}

void Program::require_abs_le(CAffine z, LinExpr rhs) {
    SocCon con;
    con.rows.push_back(std::move(rhs));
    con.rows.push_back(std::move(z.re));
    con.rows.push_back(std::move(z.im));
    socs_.push_back(std::move(con));
}

void Program::maximize_add(LinExpr expr) { objective_.add(expr); }

VarId Program::maximize_add_log2(double weight, LinExpr arg) {
    if (weight < 0.0) throw std::invalid_argument("log2 weight must be >= 0");
    if (weight <= 1e-12) return {};
    // t <= w*log2(arg): exp-cone rows (t ln2, w, w*arg)
    const VarId t = add_scalar();
    ExpCon con;
    con.a.add(t, kLn2);
    con.b = LinExpr(weight);
    con.c.add(arg, weight);
    exps_.push_back(std::move(con));
    objective_.add(t, 1.0);
    return t;
}

VarId Program::maximize_add_perspective_log2(VarId tau, LinExpr arg) {
    check_scalar(tau);
    if (vars_[tau.index].lb < 0.0)
        throw std::invalid_argument("perspective tau must be declared nonnegative");
    LinExpr te;
    te.add(tau, 1.0);
    const VarId t = hypograph_perspective_log2(te, std::move(arg));
    objective_.add(t, 1.0);
    return t;
}

VarId Program::hypograph_perspective_log2(LinExpr tau, LinExpr arg) {
    // t <= tau*log2(arg/tau): exp-cone rows (t ln2, tau, arg); tau = 0 forces
    // t <= 0 (closure convention, value 0 attained with arg >= 0).
    const VarId t = add_scalar();
    ExpCon con;
    con.a.add(t, kLn2);
    con.b = std::move(tau);
    con.c = std::move(arg);
    exps_.push_back(std::move(con));
    return t;
}

// ---------------------------------------------------------------------------
// Lowering to the ADMM standard form.

struct Layout {
    struct Entry {
        int kind;
        int dim;
        int offset;
        bool pinned = false;  // scalar with lb == ub, substituted as a constant
        double pin = 0.0;
    };
    std::vector<Entry> entries;
    int n = 0;
};

struct Lowering {
    const Program& p;
    std::shared_ptr<Layout> layout = std::make_shared<Layout>();
    detail::ConicData data;

    explicit Lowering(const Program& prog) : p(prog) {
        layout->entries.reserve(p.vars_.size());
        int n = 0;
        for (const auto& v : p.vars_) {
            int width = v.kind == 0 ? 1 : (v.kind == 1 ? 2 * v.dim : v.dim * v.dim);
            Layout::Entry ent{v.kind, v.dim, n, false, 0.0};
            if (v.kind == 0 && std::isfinite(v.lb) && v.lb == v.ub) {
                ent.pinned = true;
                ent.pin = v.lb;
            }
            layout->entries.push_back(ent);
            n += width;
        }
        layout->n = n;
    }

    // Dense coefficient row of an expression; returns the constant.
    double row_of(const LinExpr& e, Eigen::RowVectorXd& row) const {
        row.setZero(layout->n);
        double pinned_const = 0.0;
        for (const auto& [id, c] : e.scalars_) {
            require_kind(id, 0);
            const auto& ent = layout->entries[id.index];
            if (ent.pinned)
                pinned_const += c * ent.pin;
            else
                row[ent.offset] += c;
        }
        for (const auto& [id, c] : e.vectors_) {
            require_kind(id, 1);
            const auto& ent = layout->entries[id.index];
            if (c.size() != ent.dim) throw std::invalid_argument("vector coefficient dim mismatch");
            for (int i = 0; i < ent.dim; ++i) {
                row[ent.offset + 2 * i] += std::real(c[i]);
                row[ent.offset + 2 * i + 1] += std::imag(c[i]);
            }
        }
        for (const auto& [id, c] : e.matrices_) {
            require_kind(id, 2);
            const auto& ent = layout->entries[id.index];
            if (c.rows() != ent.dim || c.cols() != ent.dim)
                throw std::invalid_argument("matrix coefficient dim mismatch");
            int at = ent.offset;
            for (int col = 0; col < ent.dim; ++col) {
                row[at++] += std::real(c(col, col));
                for (int r = col + 1; r < ent.dim; ++r) {
                    row[at++] += std::real(c(col, r)) + std::real(c(r, col));
                    row[at++] += std::imag(c(r, col)) - std::imag(c(col, r));
                }
            }
        }
        return e.c0_ + pinned_const;
    }

    void require_kind(VarId id, int kind) const {
        if (!id.valid() || id.index >= static_cast<int>(p.vars_.size()))
            throw std::invalid_argument("use of undeclared variable");
        if (p.vars_[id.index].kind != kind)
            throw std::invalid_argument("variable kind mismatch in expression");
    }

    // A staged row in "value" form: s = c0 + a'x.
    struct Staged {
        Eigen::RowVectorXd a;
        double c0;
    };

    Staged stage(const LinExpr& e) const {
        Staged s;
        s.c0 = row_of(e, s.a);
        return s;
    }

    void build() {
        std::vector<Staged> zero_rows, pos_rows;
        std::vector<std::vector<Staged>> soc_blocks;
        std::vector<std::array<Staged, 3>> exp_blocks;

        for (const auto& e : p.eqs_) zero_rows.push_back(stage(e));
        for (const auto& e : p.ges_) pos_rows.push_back(stage(e));
        // bound rows from scalar declarations (pinned scalars need none)
        for (std::size_t i = 0; i < p.vars_.size(); ++i) {
            const auto& v = p.vars_[i];
            if (v.kind != 0 || layout->entries[i].pinned) continue;
            const VarId id{static_cast<int>(i)};
            if (std::isfinite(v.lb)) {
                LinExpr e(-v.lb);
                e.add(id, 1.0);
                pos_rows.push_back(stage(e));
            }
            if (std::isfinite(v.ub)) {
                LinExpr e(v.ub);
                e.add(id, -1.0);
                pos_rows.push_back(stage(e));
            }
        }
        for (const auto& s : p.socs_) {
            std::vector<Staged> block;
            block.reserve(s.rows.size());
            for (const auto& e : s.rows) block.push_back(stage(e));
            soc_blocks.push_back(std::move(block));
        }
        for (const auto& e : p.exps_) {
            std::array<Staged, 3> block{stage(e.a), stage(e.b), stage(e.c)};
            if (block[1].a.cwiseAbs().maxCoeff() == 0.0) {
                // constant perspective weight: the cone degenerates
                const double w = block[1].c0;
                if (w < -1e-12) {
                    pos_rows.push_back(Staged{Eigen::RowVectorXd::Zero(layout->n), -1.0});
                } else if (w <= 1e-300) {
                    Staged neg_a = block[0];  // a <= 0 and c >= 0
                    neg_a.a = -neg_a.a;
                    neg_a.c0 = -neg_a.c0;
                    pos_rows.push_back(std::move(neg_a));
                    pos_rows.push_back(block[2]);
                } else {
                    exp_blocks.push_back(std::move(block));
                }
            } else {
                exp_blocks.push_back(std::move(block));
            }
        }

        auto& spec = data.cones;
        spec.zero = static_cast<int>(zero_rows.size());
        spec.nonneg = static_cast<int>(pos_rows.size());
        for (const auto& b : soc_blocks) spec.soc.push_back(static_cast<int>(b.size()));
        for (const auto& v : p.vars_)
            if (v.kind == 2) spec.herm.push_back(v.dim);
        spec.exp_cones = static_cast<int>(exp_blocks.size());

        const int m = spec.rows();
        data.A.setZero(m, layout->n);
        data.b.setZero(m);
        int at = 0;
        // zero cone: s = -expr must vanish; others: s = expr in the cone
        for (const auto& r : zero_rows) {
            data.A.row(at) = r.a;
            data.b[at++] = -r.c0;
        }
        const auto emit = [&](const Staged& r) {
            data.A.row(at) = -r.a;
            data.b[at++] = r.c0;
        };
        for (const auto& r : pos_rows) emit(r);
        for (const auto& b : soc_blocks)
            for (const auto& r : b) emit(r);
        // hermitian PSD: s = sqrt2-packed(X), pure variable rows
        for (std::size_t i = 0; i < p.vars_.size(); ++i) {
            if (p.vars_[i].kind != 2) continue;
            const auto& ent = layout->entries[i];
            int slot = ent.offset;
            for (int col = 0; col < ent.dim; ++col) {
                data.A(at, slot) = -1.0;
                data.b[at++] = 0.0;
                ++slot;
                for (int r = col + 1; r < ent.dim; ++r) {
                    data.A(at++, slot++) = -kSqrt2;
                    data.A(at++, slot++) = -kSqrt2;
                }
            }
        }
        for (const auto& b : exp_blocks)
            for (const auto& r : b) emit(r);

        // maximize obj -> min c'x
        Eigen::RowVectorXd row;
        (void)row_of(p.objective_, row);
        data.c = -row.transpose();
    }

    // Primal seed from the program's hints: x from hints, s as the cone
    // projection of the induced slack, y cold.
    detail::AdmmSolution seed_from_hints() const {
        detail::AdmmSolution seed;
        VectorXd x0 = VectorXd::Zero(layout->n);
        for (const auto& [id, val] : p.scalar_hints_) {
            require_kind(id, 0);
            if (!layout->entries[id.index].pinned) x0[layout->entries[id.index].offset] = val;
        }
        for (const auto& [id, val] : p.vector_hints_) {
            require_kind(id, 1);
            const auto& ent = layout->entries[id.index];
            if (val.size() != ent.dim) throw std::invalid_argument("hint dim mismatch");
            for (int e = 0; e < ent.dim; ++e) {
                x0[ent.offset + 2 * e] = std::real(val[e]);
                x0[ent.offset + 2 * e + 1] = std::imag(val[e]);
            }
        }
        for (const auto& [id, val] : p.matrix_hints_) {
            require_kind(id, 2);
            const auto& ent = layout->entries[id.index];
            if (val.rows() != ent.dim) throw std::invalid_argument("hint dim mismatch");
            int at = ent.offset;
            for (int col = 0; col < ent.dim; ++col) {
                x0[at++] = std::real(val(col, col));
                for (int r = col + 1; r < ent.dim; ++r) {
                    x0[at++] = std::real(val(r, col));
                    x0[at++] = std::imag(val(r, col));
                }
            }
        }
        seed.x = x0;
        seed.y = VectorXd::Zero(data.b.size());
        VectorXd s0 = data.b - data.A * x0;
        std::vector<detail::ExpState> scratch;
        detail::project_primal_cones(s0, data.cones, scratch);
        seed.s = s0;
        return seed;
    }
};

namespace {

SolveStatus map_status(detail::AdmmStatus s, double achieved, const SolveOptions& opt) {
    switch (s) {
        case detail::AdmmStatus::optimal: return SolveStatus::optimal;
        case detail::AdmmStatus::infeasible: return SolveStatus::infeasible;
        case detail::AdmmStatus::unbounded: return SolveStatus::unbounded;
        case detail::AdmmStatus::max_iters:
            return achieved <= opt.accept_tol ? SolveStatus::optimal
                                              : SolveStatus::numerical_failure;
        case detail::AdmmStatus::failure: return SolveStatus::numerical_failure;
    }
    return SolveStatus::numerical_failure;
}

}  // namespace

SolveResult solve(const Program& program, const SolveOptions& options, const WarmStart* warm) {
    const auto t0 = std::chrono::steady_clock::now();
    Lowering low(program);
    low.build();  // throws on malformed programs

    detail::AdmmSettings st;
    st.eps = options.tol;
    st.max_iters = options.max_iters;
    st.alpha = options.relax_alpha;
    st.ruiz_iters = options.ruiz_iters;
    st.check_interval = options.check_interval;
    st.aa_memory = options.aa_memory;

    detail::AdmmSolution seed;
    const detail::AdmmSolution* seed_ptr = nullptr;
    if (warm != nullptr && !warm->empty() && warm->x.size() == low.layout->n &&
        warm->y.size() == low.data.b.size()) {
        seed.x = warm->x;
        seed.y = warm->y;
        seed.s = warm->s;
        seed_ptr = &seed;
    } else if (!program.scalar_hints_.empty() || !program.vector_hints_.empty() ||
               !program.matrix_hints_.empty()) {
        seed = low.seed_from_hints();
        seed_ptr = &seed;
    }

    const detail::AdmmSolution raw = detail::solve_conic(low.data, st, seed_ptr);

    SolveResult res;
    res.achieved_tol = std::max({raw.primal_res, raw.dual_res, raw.gap});
    res.status = map_status(raw.status, res.achieved_tol, options);
    res.iterations = raw.iters;
    res.layout_ = low.layout;
    if (raw.x.size() == low.layout->n) {
        res.x_ = raw.x;
        res.warm_ = WarmStart{raw.x, raw.y, raw.s};
        Eigen::RowVectorXd row;
        const double c0 = low.row_of(program.objective_, row);
        res.objective = c0 + row.dot(raw.x);
    }
    res.solve_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

double SolveResult::scalar(VarId id) const {
    const auto& ent = layout_->entries.at(static_cast<std::size_t>(id.index));
    if (ent.kind != 0) throw std::invalid_argument("not a scalar variable");
    return ent.pinned ? ent.pin : x_[ent.offset];
}

VectorXcd SolveResult::complex_vector(VarId id) const {
    const auto& ent = layout_->entries.at(static_cast<std::size_t>(id.index));
    if (ent.kind != 1) throw std::invalid_argument("not a complex vector variable");
    VectorXcd v(ent.dim);
    for (int i = 0; i < ent.dim; ++i)
        v[i] = {x_[ent.offset + 2 * i], x_[ent.offset + 2 * i + 1]};
    return v;
}

MatrixXcd SolveResult::hermitian(VarId id) const {
    const auto& ent = layout_->entries.at(static_cast<std::size_t>(id.index));
    if (ent.kind != 2) throw std::invalid_argument("not a hermitian variable");
    MatrixXcd x(ent.dim, ent.dim);
    int at = ent.offset;
    for (int col = 0; col < ent.dim; ++col) {
        x(col, col) = x_[at++];
        for (int r = col + 1; r < ent.dim; ++r) {
            const std::complex<double> e(x_[at], x_[at + 1]);
            at += 2;
            x(r, col) = e;
            x(col, r) = std::conj(e);
        }
    }
    return x;
}

MatrixXd hermitian_embed(const MatrixXcd& x) {
    const int d = static_cast<int>(x.rows());
    MatrixXd e(2 * d, 2 * d);
    e.topLeftCorner(d, d) = x.real();
    e.bottomRightCorner(d, d) = x.real();
    e.topRightCorner(d, d) = -x.imag();
    e.bottomLeftCorner(d, d) = x.imag();
    return e;
}

MatrixXcd hermitian_unembed(const MatrixXd& e) {
    const int d = static_cast<int>(e.rows()) / 2;
    MatrixXcd x(d, d);
    x.real() = 0.5 * (e.topLeftCorner(d, d) + e.bottomRightCorner(d, d));
    x.imag() = 0.5 * (e.bottomLeftCorner(d, d) - e.topRightCorner(d, d));
    return x;
}

}  // namespace riswipt::conic
