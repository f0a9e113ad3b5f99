#include "doctest.h"

#include <cmath>
#include <complex>

#include "oracle.hpp"
#include "riswipt/channel.hpp"
#include "riswipt/rng.hpp"

using namespace riswipt;

namespace {
Geometry small_geometry(int k, int n_total, Deployment d = Deployment::distributed) {
    Geometry g;
    g.k_pairs = k;
    g.d_tx = 0.0;
    g.d_rx = 6.0;
    g.d_irs = 1.0;
    g.deployment = d;
    g.n_total = n_total;
    return g;
}
}  // namespace

TEST_CASE("place_nodes puts the ring where the polar coordinates say") {
    Geometry g = small_geometry(2, 0);
    SUBCASE("d_tx = 0 collapses all Txs to the origin") {
        const auto pos = place_nodes(g);
        CHECK(pos.tx[0].norm() == 0.0);
        CHECK(pos.tx[1].norm() == 0.0);
    }
    SUBCASE("second Rx lands at (-6, 0, 0)") {
        const auto pos = place_nodes(g);
        CHECK(pos.rx[1].x() == doctest::Approx(-6.0).epsilon(1e-12));
        CHECK(std::abs(pos.rx[1].y()) < 1e-12);
        CHECK(std::abs(pos.rx[1].z()) < 1e-12);
    }
    SUBCASE("negative d_tx flips the Tx ring by pi") {
        g.d_tx = -2.0;
        const auto pos = place_nodes(g);
        CHECK(pos.tx[0].x() == doctest::Approx(-2.0).epsilon(1e-12));
        CHECK(std::abs(pos.tx[0].y()) < 1e-12);
    }
    SUBCASE("distributed IRSs sit exactly above their Rxs") {
        const auto pos = place_nodes(g);
        REQUIRE(pos.irs.size() == 2);
        CHECK((pos.irs[0] - pos.rx[0]).isApprox(Vector3d(0, 0, 1), 1e-12));
    }
    SUBCASE("centralized IRS sits on the z axis at height d_irs") {
        g.deployment = Deployment::centralized;
        const auto pos = place_nodes(g);
        REQUIRE(pos.irs.size() == 1);
        CHECK(pos.irs[0].isApprox(Vector3d(0, 0, 1), 1e-12));
    }
    SUBCASE("same geometry gives identical coordinates") {
        const auto a = place_nodes(g), b = place_nodes(g);
        for (int i = 0; i < 2; ++i) {
            CHECK(a.tx[i] == b.tx[i]);
            CHECK(a.rx[i] == b.rx[i]);
        }
    }
}

TEST_CASE("path_loss follows the -30 dB reference model") {
    FadingParams fp;
    CHECK(path_loss(1.0, 3.5, fp) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(path_loss(10.0, 2.2, fp) == doctest::Approx(1e-3 * std::pow(10.0, -2.2)).epsilon(1e-12));
    CHECK(path_loss(1.0, 0.0, fp) == doctest::Approx(1e-3).epsilon(1e-12));
    SUBCASE("sub-metre distances clamp to the reference gain") {
        CHECK(path_loss(0.2, 2.2, fp) == doctest::Approx(1e-3).epsilon(1e-12));
    }
    SUBCASE("non-positive distance is rejected") {
        CHECK_THROWS_AS(path_loss(0.0, 2.2, fp), std::invalid_argument);
        CHECK_THROWS_AS(path_loss(-1.0, 2.2, fp), std::invalid_argument);
    }
    SUBCASE("monotone non-increasing in distance for positive exponent") {
        double prev = path_loss(1.0, 2.2, fp);
        for (double d = 1.5; d < 40.0; d += 0.7) {
            const double g = path_loss(d, 2.2, fp);
            CHECK(g <= prev + 1e-18);
            prev = g;
        }
    }
}

TEST_CASE("sample_channels is a pure function of its inputs") {
    const Geometry g = small_geometry(2, 8);
    const FadingParams fp;
    const ChannelSet a = sample_channels(42, g, fp, 2);
    const ChannelSet b = sample_channels(42, g, fp, 2);
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) {
            CHECK(a.h[i][k] == b.h[i][k]);
            CHECK(a.H[i][k] == b.H[i][k]);
        }
    const ChannelSet c = sample_channels(43, g, fp, 2);
    CHECK(a.h[0][0] != c.h[0][0]);
}

TEST_CASE("empirical link powers match the path loss model") {
    const Geometry g = small_geometry(1, 2);
    const FadingParams fp;
    const auto pos = place_nodes(g);
    const double pl_direct = path_loss((pos.tx[0] - pos.rx[0]).norm(), fp.alpha_direct, fp);
    const double pl_irs_rx = path_loss((pos.irs[0] - pos.rx[0]).norm(), fp.alpha_irs, fp);

    double p_direct = 0.0, p_f = 0.0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        const ChannelSet cs = sample_channels(1000 + t, g, fp, 1);
        p_direct += std::norm(cs.h[0][0][0]);
        p_f += std::norm(cs.f[0][0][0]);
    }
    p_direct /= trials;
    p_f /= trials;
    CHECK(p_direct == doctest::Approx(pl_direct).epsilon(0.02));
    // Rician composition keeps the mean power equal to the path loss
    CHECK(p_f == doctest::Approx(pl_irs_rx).epsilon(0.02));
}

TEST_CASE("degenerate no-IRS sampling stacks only the direct row") {
    const Geometry g = small_geometry(2, 0);
    const ChannelSet cs = sample_channels(7, g, FadingParams{}, 3);
    CHECK(cs.n_total == 0);
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) {
            REQUIRE(cs.H[i][k].rows() == 1);
            CHECK(cs.H[i][k].row(0) == cs.h[i][k].adjoint());
        }
}

TEST_CASE("cascade_and_stack composes diag(f^H) G and appends h^H") {
    const Geometry g = small_geometry(2, 4);
    ChannelSet cs = sample_channels(5, g, FadingParams{}, 2);

    SUBCASE("phi matches an explicit elementwise product") {
        for (int i = 0; i < 2; ++i)
            for (int l = 0; l < cs.irs_count(); ++l)
                for (int k = 0; k < 2; ++k)
                    for (int e = 0; e < cs.n_per_irs[l]; ++e)
                        for (int m = 0; m < 2; ++m) {
                            const auto expect = std::conj(cs.f[l][k][e]) * cs.G[i][l](e, m);
                            CHECK(std::abs(cs.phi[i][l][k](e, m) - expect) <=
                                  1e-12 * std::abs(expect));
                        }
    }
    SUBCASE("all-ones f reduces phi to G") {
        for (int l = 0; l < cs.irs_count(); ++l)
            for (int k = 0; k < 2; ++k) cs.f[l][k].setOnes();
        cascade_and_stack(cs);
        for (int i = 0; i < 2; ++i) CHECK(cs.phi[i][0][0].isApprox(cs.G[i][0], 1e-15));
    }
    SUBCASE("zero G propagates zeros, last row stays h^H") {
        for (int i = 0; i < 2; ++i)
            for (int l = 0; l < cs.irs_count(); ++l) cs.G[i][l].setZero();
        cascade_and_stack(cs);
        CHECK(cs.phi[0][0][1].norm() == 0.0);
        CHECK(cs.H[0][1].row(cs.n_total) == cs.h[0][1].adjoint());
    }
    SUBCASE("dimension mismatch is rejected") {
        cs.G[0][0].resize(1, 2);
        CHECK_THROWS_AS(cascade_and_stack(cs), std::invalid_argument);
    }
}

TEST_CASE("stacked composition equals the per-IRS sum for any phase vector") {
    Rng rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const int k = 1 + trial % 3;
        const int n = (trial % 4) * k;
        const Geometry g = small_geometry(k, n, trial % 2 ? Deployment::centralized
                                                          : Deployment::distributed);
        Geometry gg = g;
        if (g.deployment == Deployment::distributed && n % k != 0) continue;
        const int m = 1 + trial % 2;
        const ChannelSet cs = sample_channels(200 + trial, gg, FadingParams{}, m);

        Eigen::VectorXcd v(cs.v_dim());
        for (int e = 0; e < cs.n_total; ++e) v[e] = rng.unit_phase();
        v[cs.n_total] = 1.0;
        Eigen::VectorXcd x(m);
        for (int e = 0; e < m; ++e) x[e] = rng.cnormal();

        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                const std::complex<double> via_stack = (v.adjoint() * cs.H[i][j] * x)(0);
                const auto row = oracle::effective_row(cs, i, j, oracle::phases_of(v));
                std::complex<double> direct(0, 0);
                for (int e = 0; e < m; ++e) direct += row[e] * x[e];
                CHECK(std::abs(via_stack - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
            }
    }
}
