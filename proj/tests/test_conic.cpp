#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "riswipt/conic.hpp"
#include "riswipt/detail/cones.hpp"
#include "riswipt/rng.hpp"

using namespace riswipt;
using namespace riswipt::conic;

TEST_CASE("scalar LP: min x s.t. x >= 1") {
    Program p;
    const VarId x = p.add_scalar(1.0);
    LinExpr obj;
    obj.add(x, -1.0);
    p.maximize_add(obj);  // max -x == min x
    const auto res = solve(p);
    REQUIRE(res.status == SolveStatus::optimal);
    CHECK(res.scalar(x) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.objective == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("perspective objective: max tau*log2(x/tau) over the unit box") {
    Program p;
    const VarId tau = p.add_scalar(0.0, 1.0);
    const VarId x = p.add_scalar(0.0, 1.0);
    LinExpr arg;
    arg.add(x, 1.0);
    p.maximize_add_perspective_log2(tau, arg);
    const auto res = solve(p);
    REQUIRE(res.status == SolveStatus::optimal);
    // stationarity of tau*ln(1/tau) gives tau = 1/e, x = 1
    CHECK(res.objective == doctest::Approx(std::log2(M_E) / M_E).epsilon(1e-5));
    CHECK(res.scalar(tau) == doctest::Approx(1.0 / M_E).epsilon(1e-4));
    CHECK(res.scalar(x) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("perspective value vanishes when x = tau") {
    Program p;
    const VarId tau = p.add_scalar(0.0, 1.0);
    LinExpr arg;
    arg.add(tau, 1.0);  // x == tau, so log2(x/tau) == 0 on the whole segment
    p.maximize_add_perspective_log2(tau, arg);
    const auto res = solve(p);
    REQUIRE(res.status == SolveStatus::optimal);
    CHECK(std::abs(res.objective) < 1e-6);
}

TEST_CASE("PSD trace program: min tr(W) s.t. Re tr(W) >= 1") {
    Program p;
    const VarId w = p.add_hermitian_psd(2);
    LinExpr lower;
    lower.add_re_trace(w, Eigen::MatrixXcd::Identity(2, 2));
    lower.add_constant(-1.0);
    p.require_ge(lower);
    LinExpr obj;
    obj.add_re_trace(w, -Eigen::MatrixXcd::Identity(2, 2));
    p.maximize_add(obj);
    const auto res = solve(p);
    REQUIRE(res.status == SolveStatus::optimal);
    // any unit-trace PSD matrix achieves the bound tr(W) = 1
    CHECK(res.objective == doctest::Approx(-1.0).epsilon(1e-6));
    const Eigen::MatrixXcd W = res.hermitian(w);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(W);
    CHECK(es.eigenvalues().minCoeff() > -1e-7);
}

TEST_CASE("complex SDP: max Re tr(C W) with tr(W) <= 1 attains the top eigenvalue") {
    Rng rng(7);
    Eigen::MatrixXcd B(3, 3);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) B(r, c) = rng.cnormal();
    const Eigen::MatrixXcd C = B + B.adjoint();

    Program p;
    const VarId w = p.add_hermitian_psd(3);
    LinExpr tr_limit(1.0);
    tr_limit.add_re_trace(w, -Eigen::MatrixXcd::Identity(3, 3));
    p.require_ge(tr_limit);
    LinExpr obj;
    obj.add_re_trace(w, C);
    p.maximize_add(obj);
    const auto res = solve(p);
    REQUIRE(res.status == SolveStatus::optimal);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(C);
    const double lam_max = es.eigenvalues().maxCoeff();
    // sampling oracle: random unit-trace rank-1 candidates never beat lam_max
    Rng rng2(8);
    double best_sample = -1e300;
    for (int i = 0; i < 200; ++i) {
        Eigen::VectorXcd u(3);
        for (int e = 0; e < 3; ++e) u[e] = rng2.cnormal();
        u.normalize();
        best_sample = std::max(best_sample, std::real(u.dot(C * u)));
    }
    CHECK(best_sample <= lam_max + 1e-9);
    CHECK(res.objective == doctest::Approx(lam_max).epsilon(1e-6));
}

TEST_CASE("quadratic cone helpers") {
    SUBCASE("quad_le: max e+r with e^2 + r^2 <= 2") {
        Program p;
        const VarId e = p.add_scalar(), r = p.add_scalar();
        CAffine ce, cr;
        ce.re.add(e, 1.0);
        cr.re.add(r, 1.0);
        p.require_quad_le({ce, cr}, LinExpr(2.0));
        LinExpr obj;
        obj.add(e, 1.0).add(r, 1.0);
        p.maximize_add(obj);
        const auto res = solve(p);
        REQUIRE(res.status == SolveStatus::optimal);
        CHECK(res.objective == doctest::Approx(2.0).epsilon(1e-6));
    }
    SUBCASE("prod_ge: max z with z^2 <= (1-rho)*q, rho=1/2, q=2") {
        Program p;
        const VarId z = p.add_scalar(0.0);
        CAffine cz;
        cz.re.add(z, 1.0);
        p.require_prod_ge(LinExpr(0.5), LinExpr(2.0), {cz});
        LinExpr obj;
        obj.add(z, 1.0);
        p.maximize_add(obj);
        const auto res = solve(p);
        REQUIRE(res.status == SolveStatus::optimal);
        CHECK(res.objective == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("abs_le pins a complex entry into the unit disc") {
        Program p;
        const VarId v = p.add_complex_vector(2);
        CAffine entry;
        entry.re.add_re_inner(v, Eigen::VectorXcd::Unit(2, 0));
        entry.im.add_re_inner(v, std::complex<double>(0, 1) * Eigen::VectorXcd::Unit(2, 0));
        p.require_abs_le(entry, LinExpr(1.0));
        LinExpr fix_im;  // second coordinate pinned to 3 (sanity of equalities)
        fix_im.add_re_inner(v, Eigen::VectorXcd::Unit(2, 1));
        fix_im.add_constant(-3.0);
        p.require_eq(fix_im);
        LinExpr obj;
        obj.add_re_inner(v, Eigen::VectorXcd::Unit(2, 0));
        p.maximize_add(obj);
        const auto res = solve(p);
        REQUIRE(res.status == SolveStatus::optimal);
        CHECK(res.objective == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(std::real(res.complex_vector(v)[1]) == doctest::Approx(3.0).epsilon(1e-6));
    }
}

TEST_CASE("infeasible and unbounded detection") {
    SUBCASE("x >= 1 and x <= 0") {
        Program p;
        const VarId x = p.add_scalar(1.0, 0.0);
        LinExpr obj;
        obj.add(x, -1.0);
        p.maximize_add(obj);
        CHECK(solve(p).status == SolveStatus::infeasible);
    }
    SUBCASE("max x with x >= 0") {
        Program p;
        const VarId x = p.add_scalar(0.0);
        LinExpr obj;
        obj.add(x, 1.0);
        p.maximize_add(obj);
        CHECK(solve(p).status == SolveStatus::unbounded);
    }
}

TEST_CASE("single-user rate program matches the MRT closed form, including bad scaling") {
    // max tau*log2((tr(a a^H W) + tau s2)/(tau s2)) s.t. tr(W) <= tau P, tau <= 1:
    // MRT at full power and tau = 1 gives log2(1 + P||a||^2/s2).
    const auto run = [](double power, double sigma_sq, const Eigen::VectorXcd& a) {
        Program p;
        const VarId tau = p.add_scalar(0.0, 1.0);
        const VarId w = p.add_hermitian_psd(static_cast<int>(a.size()));
        LinExpr y;
        y.add_re_trace(w, a * a.adjoint());
        y.add(tau, sigma_sq);
        p.maximize_add_perspective_log2(tau, y);
        LinExpr noise_term;
        noise_term.add(tau, -std::log2(sigma_sq));
        p.maximize_add(noise_term);
        LinExpr pw;
        pw.add(tau, power);
        pw.add_re_trace(w, -Eigen::MatrixXcd::Identity(a.size(), a.size()));
        p.require_ge(pw);
        const auto res = solve(p);
        REQUIRE(res.status == SolveStatus::optimal);
        const double expect = std::log2(1.0 + power * a.squaredNorm() / sigma_sq);
        CHECK(res.objective == doctest::Approx(expect).epsilon(1e-5));
    };
    Eigen::VectorXcd a(2);
    a << std::complex<double>(1, 0), std::complex<double>(0, 1);
    run(2.0, 1.0, a);
    // physical scales: P ~ 0.2 W, channel ~ 1e-3, noise ~ 1e-8 W
    run(0.1995, 1e-8, 1e-3 * a);
}

TEST_CASE("perspective hypograph encoding matches direct evaluation on a grid") {
    for (double tau0 = 0.1; tau0 <= 1.0; tau0 += 0.15) {
        for (double x0 = 0.1; x0 <= 1.0; x0 += 0.15) {
            Program p;
            const VarId tau = p.add_scalar(0.0);
            const VarId x = p.add_scalar(0.0);
            LinExpr pin_tau;
            pin_tau.add(tau, 1.0).add_constant(-tau0);
            p.require_eq(pin_tau);
            LinExpr pin_x;
            pin_x.add(x, 1.0).add_constant(-x0);
            p.require_eq(pin_x);
            LinExpr arg;
            arg.add(x, 1.0);
            p.maximize_add_perspective_log2(tau, arg);
            const auto res = solve(p);
            REQUIRE(res.status == SolveStatus::optimal);
            CHECK(res.objective ==
                  doctest::Approx(tau0 * std::log2(x0 / tau0)).epsilon(1e-5));
        }
    }
}

TEST_CASE("perspective hypograph at tau = 0 forces t <= 0") {
    Program p;
    const VarId tau = p.add_scalar(0.0, 0.0);
    LinExpr arg(1.0);
    const VarId t = p.maximize_add_perspective_log2(tau, arg);
    const auto res = solve(p);
    REQUIRE(res.status == SolveStatus::optimal);
    CHECK(res.objective == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(res.scalar(t) < 1e-6);
}

TEST_CASE("re-solving is deterministic") {
    Program p;
    const VarId x = p.add_scalar(1.0, 5.0);
    LinExpr obj;
    obj.add(x, -3.0);
    p.maximize_add(obj);
    const auto r1 = solve(p);
    const auto r2 = solve(p);
    REQUIRE(r1.status == SolveStatus::optimal);
    CHECK(r1.objective == r2.objective);
    CHECK(r1.iterations == r2.iterations);
}

TEST_CASE("warm start reuses the previous iterate") {
    Program p;
    const VarId w = p.add_hermitian_psd(2);
    LinExpr lower;
    lower.add_re_trace(w, Eigen::MatrixXcd::Identity(2, 2));
    lower.add_constant(-1.0);
    p.require_ge(lower);
    LinExpr obj;
    obj.add_re_trace(w, -Eigen::MatrixXcd::Identity(2, 2));
    p.maximize_add(obj);
    const auto cold = solve(p);
    REQUIRE(cold.status == SolveStatus::optimal);
    const WarmStart ws = cold.warm();
    const auto hot = solve(p, SolveOptions{}, &ws);
    REQUIRE(hot.status == SolveStatus::optimal);
    CHECK(hot.objective == doctest::Approx(cold.objective).epsilon(1e-6));
    // must not be materially slower than a cold solve on a tiny program
    CHECK(hot.iterations <= cold.iterations + 2 * SolveOptions{}.check_interval);
}

TEST_CASE("malformed programs throw") {
    Program p;
    const VarId v = p.add_complex_vector(3);
    LinExpr e;
    e.add_re_inner(v, Eigen::VectorXcd::Ones(2));  // wrong dimension
    p.require_ge(e);
    CHECK_THROWS_AS(solve(p), std::invalid_argument);

    Program q;
    const VarId tau = q.add_scalar();  // no nonneg declaration
    CHECK_THROWS_AS(q.maximize_add_perspective_log2(tau, LinExpr(1.0)),
                    std::invalid_argument);
}

TEST_CASE("hermitian_embed is a lossless PSD-preserving representation") {
    SUBCASE("identity and zero") {
        CHECK(hermitian_embed(Eigen::MatrixXcd::Identity(3, 3))
                  .isApprox(Eigen::MatrixXd::Identity(6, 6), 1e-15));
        CHECK(hermitian_embed(Eigen::MatrixXcd::Zero(2, 2)).norm() == 0.0);
    }
    SUBCASE("random Hermitian PSD: duplicated spectrum and round trip") {
        Rng rng(11);
        Eigen::MatrixXcd B(3, 3);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) B(r, c) = rng.cnormal();
        const Eigen::MatrixXcd X = B * B.adjoint();
        const Eigen::MatrixXd E = hermitian_embed(X);
        CHECK(hermitian_unembed(E).isApprox(X, 1e-12));

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ec(X);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(E);
        for (int i = 0; i < 3; ++i) {
            CHECK(er.eigenvalues()[2 * i] == doctest::Approx(ec.eigenvalues()[i]).epsilon(1e-9));
            CHECK(er.eigenvalues()[2 * i + 1] ==
                  doctest::Approx(ec.eigenvalues()[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("exponential cone projection satisfies the Moreau conditions") {
    Rng rng(123);
    int hard_cases = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        Eigen::Vector3d v;
        const double scale = std::pow(10.0, 3.0 * (rng.uniform() - 0.5));
        for (int i = 0; i < 3; ++i) v[i] = scale * 4.0 * (rng.uniform() - 0.5);
        conic::detail::ExpState warm;
        const Eigen::Vector3d pr = conic::detail::project_exp_cone(v, warm);
        const Eigen::Vector3d d = v - pr;
        const double tol = 1e-8 * std::max(1.0, v.norm());
        CHECK(conic::detail::in_exp_cone(pr, tol));
        // d in polar(K) iff its projection onto K vanishes; this form stays
        // well-conditioned near the cone's edges
        conic::detail::ExpState warm2;
        CHECK(conic::detail::project_exp_cone(d, warm2).norm() < tol);
        CHECK(std::abs(pr.dot(d)) < 1e-7 * std::max(1.0, v.squaredNorm()));
        if (d.norm() > tol && pr.norm() > tol) ++hard_cases;
    }
    CHECK(hard_cases > 200);  // the sampler must actually hit the boundary regime
}

TEST_CASE("SOC and PSD projections") {
    Eigen::VectorXd s(3);
    s << 1.0, 3.0, 4.0;  // ||z|| = 5 > t = 1 -> scaled to the boundary
    conic::detail::project_soc(s);
    CHECK(s[0] == doctest::Approx(3.0));
    CHECK(s.tail(2).norm() == doctest::Approx(3.0));

    // pack a Hermitian indefinite matrix, project, expect the PSD part back
    Rng rng(5);
    Eigen::MatrixXcd B(2, 2);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) B(r, c) = rng.cnormal();
    Eigen::MatrixXcd X = B + B.adjoint();
    X(0, 0) -= 3.0;  // make it indefinite
    const double sq2 = std::sqrt(2.0);
    Eigen::VectorXd pk(4);
    pk << std::real(X(0, 0)), sq2 * std::real(X(1, 0)), sq2 * std::imag(X(1, 0)),
        std::real(X(1, 1));
    conic::detail::project_herm_psd(pk, 2);
    Eigen::MatrixXcd Y(2, 2);
    Y(0, 0) = pk[0];
    Y(1, 0) = std::complex<double>(pk[1] / sq2, pk[2] / sq2);
    Y(0, 1) = std::conj(Y(1, 0));
    Y(1, 1) = pk[3];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Y);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    // projection difference must be orthogonal to the result (self-dual cone)
    Eigen::MatrixXcd D = Y - X;
    CHECK(std::abs(std::real((Y * D).trace())) < 1e-9);
}
