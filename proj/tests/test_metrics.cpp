#include "doctest.h"

#include <cmath>

#include "oracle.hpp"
#include "riswipt/channel.hpp"
#include "riswipt/metrics.hpp"
#include "riswipt/rng.hpp"

using namespace riswipt;

namespace {

ChannelSet random_channels(std::uint64_t seed, int k, int m, int n) {
    Geometry g;
    g.k_pairs = k;
    g.d_rx = 6.0;
    g.d_irs = 1.0;
    g.n_total = n;
    g.deployment = n > 0 && n % k == 0 ? Deployment::distributed : Deployment::centralized;
    return sample_channels(seed, g, FadingParams{}, m);
}

// random Hermitian PSD with trace <= p
MatrixXcd random_cov(Rng& rng, int m, double p) {
    MatrixXcd b(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) b(r, c) = rng.cnormal();
    MatrixXcd s = b * b.adjoint();
    return s * (p * rng.uniform() / std::real(s.trace()));
}

VectorXcd random_phases(Rng& rng, int dim) {
    VectorXcd v(dim);
    for (int e = 0; e + 1 < dim; ++e) v[e] = rng.unit_phase();
    v[dim - 1] = 1.0;
    return v;
}

SchemeSolution random_solution(Rng& rng, const ChannelSet& cs, Scheme scheme, double p) {
    SchemeSolution sol;
    sol.scheme = scheme;
    sol.k_pairs = cs.k_pairs;
    sol.m_antennas = cs.m_antennas;
    const int slots = is_hybrid_family(scheme) ? 3 : cs.k_pairs;
    sol.S.assign(cs.k_pairs, {});
    for (int i = 0; i < cs.k_pairs; ++i)
        for (int j = 0; j < slots; ++j) sol.S[i].push_back(random_cov(rng, cs.m_antennas, p));
    double left = 1.0;
    for (int j = 0; j < slots; ++j) {
        const double t = left * rng.uniform();
        sol.tau.push_back(t);
        left -= t;
    }
    if (is_hybrid_family(scheme))
        for (int k = 0; k < cs.k_pairs; ++k) sol.rho.push_back(rng.uniform());
    for (int j = 0; j < slots; ++j) sol.v.push_back(random_phases(rng, cs.v_dim()));
    return sol;
}

}  // namespace

TEST_CASE("effective_channel reduces to the direct link when the IRS is off") {
    const ChannelSet cs = random_channels(3, 2, 2, 4);
    VectorXcd v = VectorXcd::Zero(cs.v_dim());
    v[cs.n_total] = 1.0;
    CHECK(effective_channel(cs.H[0][1], v).isApprox(cs.h[0][1], 1e-14));

    const ChannelSet bare = random_channels(4, 2, 2, 0);
    VectorXcd one = VectorXcd::Ones(1);
    CHECK(effective_channel(bare.H[1][0], one).isApprox(bare.h[1][0], 1e-14));

    VectorXcd bad = VectorXcd::Ones(3);
    CHECK_THROWS_AS(effective_channel(bare.H[0][0], bad), std::invalid_argument);
}

TEST_CASE("hybrid slot-2 SINR follows the PS form") {
    SUBCASE("single user, full split") {
        const ChannelSet cs = random_channels(11, 1, 1, 0);
        NoiseAndPower np = NoiseAndPower::uniform(1, 0.2, 5e-9, 5e-9, 0.7, 0.0);
        std::vector<MatrixXcd> s2{MatrixXcd::Constant(1, 1, 0.2)};
        VectorXcd v = VectorXcd::Ones(1);
        const auto g = sinr_hybrid_slot2(cs, s2, v, {1.0}, np);
        const double expect = 0.2 * std::norm(cs.h[0][0][0]) / (5e-9 + 5e-9);
        CHECK(g[0] == doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("rho -> 0 sends the SINR to 0, rho = 0 is defined as 0") {
        const ChannelSet cs = random_channels(12, 1, 1, 0);
        NoiseAndPower np = NoiseAndPower::uniform(1, 0.2, 5e-9, 5e-9, 0.7, 0.0);
        std::vector<MatrixXcd> s2{MatrixXcd::Constant(1, 1, 0.2)};
        VectorXcd v = VectorXcd::Ones(1);
        CHECK(sinr_hybrid_slot2(cs, s2, v, {1e-9}, np)[0] < 1e-3);
        CHECK(sinr_hybrid_slot2(cs, s2, v, {0.0}, np)[0] == 0.0);
    }
}

TEST_CASE("evaluators agree with the direct-formula oracle on random instances") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 1 + trial % 3;
        const int m = 1 + (trial / 3) % 3;
        const int n = (trial % 2) ? 0 : 2 * k;
        const ChannelSet cs = random_channels(500 + trial, k, m, n);
        NoiseAndPower np = NoiseAndPower::uniform(k, 0.2, 5e-9, 5e-9, 0.7, 5e-7);

        SchemeSolution hy = random_solution(rng, cs, Scheme::hybrid, 0.2);
        std::vector<MatrixXcd> s2, s3;
        for (int i = 0; i < k; ++i) {
            s2.push_back(hy.S[i][1]);
            s3.push_back(hy.S[i][2]);
        }
        const auto g2 = sinr_hybrid_slot2(cs, s2, hy.v[1], hy.rho, np);
        const auto g3 = sinr_hybrid_slot3(cs, s3, hy.v[2], np);
        const auto q = harvested_energy_hybrid(cs, hy.S, hy.v[0], hy.v[1], hy.tau, hy.rho, np.zeta);
        for (int j = 0; j < k; ++j) {
            const double o2 = oracle::sinr_slot2(cs, s2, hy.v[1], hy.rho[j], j, np);
            const double o3 = oracle::sinr_slot3(cs, s3, hy.v[2], j, np);
            const double oq = oracle::harvested_hybrid(cs, hy.S, hy.v[0], hy.v[1], hy.tau,
                                                       hy.rho[j], j, np.zeta);
            CHECK(g2[j] == doctest::Approx(o2).epsilon(1e-9));
            CHECK(g3[j] == doctest::Approx(o3).epsilon(1e-9));
            CHECK(q[j] == doctest::Approx(oq).epsilon(1e-9));
        }
        CHECK(sum_rate(cs, hy, np) == doctest::Approx(oracle::sum_rate(cs, hy, np)).epsilon(1e-9));

        SchemeSolution td = random_solution(rng, cs, Scheme::tdma, 0.2);
        const auto gt = sinr_tdma(cs, td.S, td.v, np);
        const auto gd = sinr_tdma_d(cs, td.S, td.v, np);
        const auto qt = harvested_energy_tdma(cs, td.S, td.v, td.tau, np.zeta);
        for (int j = 0; j < k; ++j) {
            CHECK(gt[j] == doctest::Approx(oracle::sinr_tdma(cs, td.S, td.v, j, np)).epsilon(1e-9));
            CHECK(gd[j] ==
                  doctest::Approx(oracle::sinr_tdma_d(cs, td.S, td.v, j, np)).epsilon(1e-9));
            CHECK(qt[j] ==
                  doctest::Approx(oracle::harvested_tdma(cs, td.S, td.v, td.tau, j, np.zeta))
                      .epsilon(1e-9));
            // dropping nonnegative interference can only help
            CHECK(gd[j] >= gt[j] - 1e-15);
        }
        CHECK(sum_rate(cs, td, np) == doctest::Approx(oracle::sum_rate(cs, td, np)).epsilon(1e-9));
        td.scheme = Scheme::tdma_d;
        CHECK(sum_rate(cs, td, np) == doctest::Approx(oracle::sum_rate(cs, td, np)).epsilon(1e-9));
    }
}

TEST_CASE("trivial evaluator identities") {
    const ChannelSet cs = random_channels(21, 2, 2, 4);
    NoiseAndPower np = NoiseAndPower::uniform(2, 0.2, 5e-9, 5e-9, 0.7, 5e-7);
    Rng rng(22);
    SchemeSolution hy = random_solution(rng, cs, Scheme::hybrid, 0.2);

    SUBCASE("zero ID time means zero rate") {
        hy.tau = {1.0, 0.0, 0.0};
        CHECK(sum_rate(cs, hy, np) == 0.0);
    }
    SUBCASE("TDMA with K=1 harvests nothing") {
        const ChannelSet one = random_channels(23, 1, 2, 0);
        NoiseAndPower np1 = NoiseAndPower::uniform(1, 0.2, 5e-9, 5e-9, 0.7, 0.0);
        SchemeSolution td = random_solution(rng, one, Scheme::tdma, 0.2);
        const auto q = harvested_energy_tdma(one, td.S, td.v, td.tau, np1.zeta);
        CHECK(q[0] == 0.0);
    }
    SUBCASE("harvested energy is linear in zeta, tau, and S") {
        const auto q1 = harvested_energy_hybrid(cs, hy.S, hy.v[0], hy.v[1], hy.tau, hy.rho, 0.7);
        const auto q2 = harvested_energy_hybrid(cs, hy.S, hy.v[0], hy.v[1], hy.tau, hy.rho, 0.35);
        CHECK(q2[0] == doctest::Approx(0.5 * q1[0]).epsilon(1e-12));
        auto tau_half = hy.tau;
        tau_half[0] *= 0.5;
        tau_half[1] *= 0.5;
        const auto q3 =
            harvested_energy_hybrid(cs, hy.S, hy.v[0], hy.v[1], tau_half, hy.rho, 0.7);
        CHECK(q3[1] == doctest::Approx(0.5 * q1[1]).epsilon(1e-12));
        auto s_half = hy.S;
        for (auto& row : s_half)
            for (auto& s : row) s *= 0.5;
        const auto q4 = harvested_energy_hybrid(cs, s_half, hy.v[0], hy.v[1], hy.tau, hy.rho, 0.7);
        CHECK(q4[0] == doctest::Approx(0.5 * q1[0]).epsilon(1e-12));
    }
    SUBCASE("slot-2 SINR numerator is homogeneous in S") {
        // scaling S by c in (0,1] scales the numerator by exactly c
        std::vector<MatrixXcd> s2{hy.S[0][1], hy.S[1][1]};
        const double c = 0.37;
        std::vector<MatrixXcd> s2c{c * s2[0], c * s2[1]};
        const VectorXcd a = effective_channel(cs.H[0][0], hy.v[1]);
        const double num = std::real(a.dot(s2[0] * a));
        const double numc = std::real(a.dot(s2c[0] * a));
        CHECK(numc == doctest::Approx(c * num).epsilon(1e-12));
        CHECK(numc <= c * num + 1e-15);
    }
}

TEST_CASE("constraint residuals classify feasibility") {
    const ChannelSet cs = random_channels(31, 2, 2, 4);
    Rng rng(32);
    SUBCASE("zero EH requirement never blocks") {
        NoiseAndPower np = NoiseAndPower::uniform(2, 0.2, 5e-9, 5e-9, 0.7, 0.0);
        SchemeSolution sol = random_solution(rng, cs, Scheme::hybrid, 0.19);
        const auto rep = constraint_residuals(cs, sol, np);
        CHECK(rep.eh >= 0.0);
        CHECK(rep.feasible());
    }
    SUBCASE("zero covariances with a positive requirement are infeasible") {
        NoiseAndPower np = NoiseAndPower::uniform(2, 0.2, 5e-9, 5e-9, 0.7, 5e-7);
        SchemeSolution sol = random_solution(rng, cs, Scheme::hybrid, 0.19);
        for (auto& row : sol.S)
            for (auto& s : row) s.setZero();
        const auto rep = constraint_residuals(cs, sol, np);
        CHECK(rep.eh < -0.999);
        CHECK_FALSE(rep.feasible());
    }
    SUBCASE("EH slack matches a hand-computed 2x2 instance") {
        NoiseAndPower np = NoiseAndPower::uniform(2, 0.2, 5e-9, 5e-9, 0.7, 5e-7);
        SchemeSolution sol = random_solution(rng, cs, Scheme::hybrid, 0.19);
        const auto q = oracle::harvested_hybrid(cs, sol.S, sol.v[0], sol.v[1], sol.tau,
                                                sol.rho[0], 0, np.zeta);
        const auto q1 = oracle::harvested_hybrid(cs, sol.S, sol.v[0], sol.v[1], sol.tau,
                                                 sol.rho[1], 1, np.zeta);
        const double expect = std::min((q - 5e-7) / 5e-7, (q1 - 5e-7) / 5e-7);
        CHECK(constraint_residuals(cs, sol, np).eh == doctest::Approx(expect).epsilon(1e-9));
    }
    SUBCASE("power and modulus violations are caught") {
        NoiseAndPower np = NoiseAndPower::uniform(2, 0.2, 5e-9, 5e-9, 0.7, 0.0);
        SchemeSolution sol = random_solution(rng, cs, Scheme::hybrid, 0.19);
        sol.S[0][0] = MatrixXcd::Identity(2, 2) * 0.2;  // trace 0.4 > 0.2
        auto rep = constraint_residuals(cs, sol, np);
        CHECK(rep.power < -0.5);
        sol.S[0][0] *= 0.1;
        sol.v[1][0] = std::complex<double>(1.5, 0.0);
        rep = constraint_residuals(cs, sol, np);
        CHECK(rep.modulus < -0.4);
    }
}
