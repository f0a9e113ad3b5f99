#pragma once

#include <Eigen/Dense>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

namespace riswipt::conic {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Handle into a Program's variable table.
struct VarId {
    int index = -1;
    bool valid() const { return index >= 0; }
};

/// Real affine expression: constant + sum coef*scalar + sum Re(c^H vec)
/// + sum Re tr(C X) over declared variables.
class LinExpr {
public:
    LinExpr() = default;
    LinExpr(double constant) : c0_(constant) {}  // NOLINT: implicit by design

    LinExpr& add(VarId scalar, double coef = 1.0);
    LinExpr& add_re_inner(VarId cvec, VectorXcd coef);  // += Re(coef^H v)
    LinExpr& add_re_trace(VarId herm, MatrixXcd coef);  // += Re tr(coef X)
    LinExpr& add(const LinExpr& other, double scale = 1.0);
    LinExpr& add_constant(double c) {
        c0_ += c;
        return *this;
    }
    double constant_term() const { return c0_; }

private:
    friend class Program;
    friend struct Lowering;
    double c0_ = 0.0;
    std::vector<std::pair<VarId, double>> scalars_;
    std::vector<std::pair<VarId, VectorXcd>> vectors_;
    std::vector<std::pair<VarId, MatrixXcd>> matrices_;
};

/// Complex affine expression (used as a row inside quadratic-norm bounds).
struct CAffine {
    LinExpr re, im;
};

/// Rows of L*v + c0 as complex affine expressions in the vector variable v.
std::vector<CAffine> complex_rows(VarId cvec, const MatrixXcd& L,
                                  const VectorXcd& c0 = VectorXcd());

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };

const char* status_name(SolveStatus s);

struct SolveOptions {
    double tol = 1e-8;          // target primal/dual/gap accuracy
    int max_iters = 100000;
    double accept_tol = 1e-7;   // at iteration cap, accept if residuals <= this
    double relax_alpha = 1.8;
    int ruiz_iters = 15;
    int check_interval = 25;
    int aa_memory = 8;          // Anderson acceleration depth, 0 disables
};

/// Raw iterate of a previous solve on an identically-shaped program.
struct WarmStart {
    VectorXd x, y, s;
    bool empty() const { return x.size() == 0; }
};

struct Layout;  // internal variable layout, shared with results
class Program;
class SolveResult;
SolveResult solve(const Program& program, const SolveOptions& options, const WarmStart* warm);

class SolveResult {
public:
    SolveStatus status = SolveStatus::numerical_failure;
    double objective = 0.0;  // value of the maximized objective
    int iterations = 0;
    double solve_time_ms = 0.0;
    double achieved_tol = 1e300;  // max of primal/dual/gap residuals

    double scalar(VarId id) const;
    VectorXcd complex_vector(VarId id) const;
    MatrixXcd hermitian(VarId id) const;
    WarmStart warm() const { return warm_; }

private:
    friend struct Lowering;
    friend SolveResult solve(const Program&, const SolveOptions&, const WarmStart*);
    std::shared_ptr<const Layout> layout_;
    VectorXd x_;
    WarmStart warm_;
};

/// Convex program over scalars, complex vectors, and Hermitian-PSD matrix
/// variables, with affine/second-order constraints and an objective of the
/// form affine + sum of (perspective) log2 hypograph terms. The single
/// entry point is solve().
class Program {
public:
    VarId add_scalar(double lb = -kInf, double ub = kInf);
    VarId add_complex_vector(int dim);
    VarId add_hermitian_psd(int dim);

    void require_eq(LinExpr expr);                     // expr == 0
    void require_ge(LinExpr expr);                     // expr >= 0
    void require_quad_le(std::vector<CAffine> terms, LinExpr rhs);  // sum |term|^2 <= rhs
    void require_prod_ge(LinExpr u, LinExpr w, std::vector<CAffine> terms);  // u*w >= sum |term|^2
    void require_abs_le(CAffine z, LinExpr rhs);       // |z| <= rhs

    /// Primal starting guesses; used to seed the solver when no explicit
    /// warm start is supplied.
    void hint(VarId id, double value);
    void hint(VarId id, const VectorXcd& value);
    void hint(VarId id, const MatrixXcd& value);

    void maximize_add(LinExpr expr);
    /// objective += weight * log2(arg); returns the epigraph variable
    /// (invalid and a no-op when weight <= 1e-12).
    VarId maximize_add_log2(double weight, LinExpr arg);
    /// objective += tau * log2(arg/tau); tau must be a scalar declared with
    /// lower bound >= 0. Value 0 at tau = 0 (closure convention).
    VarId maximize_add_perspective_log2(VarId tau, LinExpr arg);
    /// Hypograph encoding t <= tau*log2(arg/tau) without touching the
    /// objective; returns t.
    VarId hypograph_perspective_log2(LinExpr tau, LinExpr arg);

    int num_variables() const { return static_cast<int>(vars_.size()); }

private:
    friend struct Lowering;
    friend SolveResult solve(const Program&, const SolveOptions&, const WarmStart*);
    struct VarDecl {
        int kind;  // 0 scalar, 1 cvec, 2 herm
        int dim;
        double lb, ub;
    };
    struct SocCon {
        std::vector<LinExpr> rows;  // [t; z...], ||z|| <= t
    };
    struct ExpCon {
        LinExpr a, b, c;  // b e^{a/b} <= c
    };
    std::vector<VarDecl> vars_;
    std::vector<LinExpr> eqs_, ges_;
    std::vector<SocCon> socs_;
    std::vector<ExpCon> exps_;
    std::vector<std::pair<VarId, double>> scalar_hints_;
    std::vector<std::pair<VarId, VectorXcd>> vector_hints_;
    std::vector<std::pair<VarId, MatrixXcd>> matrix_hints_;
    LinExpr objective_;

    void check_scalar(VarId id) const;
};

/// Solves the program. Backend failures surface as status
/// numerical_failure, never as exceptions; malformed programs throw
/// std::invalid_argument.
inline SolveResult solve(const Program& program) { return solve(program, SolveOptions{}, nullptr); }
inline SolveResult solve(const Program& program, const SolveOptions& options) {
    return solve(program, options, nullptr);
}

/// Real-symmetric representation [[Re X, -Im X], [Im X, Re X]] of a complex
/// Hermitian matrix; PSD iff X is, with eigenvalues duplicated.
MatrixXd hermitian_embed(const MatrixXcd& x);
MatrixXcd hermitian_unembed(const MatrixXd& e);

}  // namespace riswipt::conic
