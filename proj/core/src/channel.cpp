#include "riswipt/channel.hpp"

#include <cmath>

#include "riswipt/rng.hpp"

namespace riswipt {

namespace {

Vector3d spherical(double r, double azimuth, double polar) {
    return {r * std::sin(polar) * std::cos(azimuth), r * std::sin(polar) * std::sin(azimuth),
            r * std::cos(polar)};
}

double link_distance(const Vector3d& a, const Vector3d& b) { return (a - b).norm(); }

MatrixXcd draw_rayleigh(Rng& rng, int rows, int cols, double gain) {
    MatrixXcd x(rows, cols);
    const double amp = std::sqrt(gain);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) x(r, c) = amp * rng.cnormal();
    return x;
}

// LoS component is the all-ones rank-one matrix; no array response is modeled.
MatrixXcd draw_rician(Rng& rng, int rows, int cols, double gain, double kappa) {
    const double los = std::sqrt(kappa / (1.0 + kappa));
    const double nlos = std::sqrt(1.0 / (1.0 + kappa));
    MatrixXcd x(rows, cols);
    const double amp = std::sqrt(gain);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) x(r, c) = amp * (los + nlos * rng.cnormal());
    return x;
}

}  // namespace

NodePositions place_nodes(const Geometry& geometry) {
    geometry.validate();
    const int k = geometry.k_pairs;
    NodePositions pos;
    pos.tx.reserve(k);
    pos.rx.reserve(k);
    const double tx_radius = std::abs(geometry.d_tx);
    const double tx_shift = geometry.d_tx < 0.0 ? M_PI : 0.0;
    for (int i = 0; i < k; ++i) {
        const double azimuth = 2.0 * M_PI * i / k;
        pos.tx.push_back(spherical(tx_radius, azimuth + tx_shift, M_PI / 2.0));
        pos.rx.push_back(spherical(geometry.d_rx, azimuth, M_PI / 2.0));
    }
    if (geometry.deployment == Deployment::distributed) {
        pos.irs.reserve(k);
        for (int i = 0; i < k; ++i) pos.irs.push_back(pos.rx[i] + Vector3d{0.0, 0.0, geometry.d_irs});
    } else {
        pos.irs.push_back(spherical(geometry.d_irs, M_PI / 2.0, 0.0));
    }
    return pos;
}

double path_loss(double distance_m, double exponent, const FadingParams& params) {
    params.validate();
    if (!(distance_m > 0.0)) throw std::invalid_argument("path_loss: non-positive distance");
    const double d = std::max(distance_m, 1.0);
    return std::pow(10.0, params.pl_ref_db / 10.0) * std::pow(d, -exponent);
}

ChannelSet sample_channels(std::uint64_t seed, const Geometry& geometry,
                           const FadingParams& fading, int m_antennas) {
    geometry.validate();
    fading.validate();
    if (m_antennas < 1) throw std::invalid_argument("m_antennas must be >= 1");

    const NodePositions pos = place_nodes(geometry);
    const int k = geometry.k_pairs;
    const int l = geometry.irs_count();
    const std::vector<int> n_per = geometry.elements_per_irs();
    const double kappa = std::pow(10.0, fading.rician_db / 10.0);

    ChannelSet cs;
    cs.k_pairs = k;
    cs.m_antennas = m_antennas;
    cs.n_total = geometry.n_total;
    cs.n_per_irs = n_per;
    cs.h.assign(k, std::vector<VectorXcd>(k));
    cs.G.assign(k, std::vector<MatrixXcd>(l));
    cs.f.assign(l, std::vector<VectorXcd>(k));

    // Draw order is part of the determinism contract: h (i,k), G (i,l), f (l,k).
    Rng rng(seed);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            const double g = path_loss(link_distance(pos.tx[i], pos.rx[j]), fading.alpha_direct, fading);
            cs.h[i][j] = draw_rayleigh(rng, m_antennas, 1, g).col(0);
        }
    for (int i = 0; i < k; ++i)
        for (int s = 0; s < l; ++s) {
            const double g = path_loss(link_distance(pos.tx[i], pos.irs[s]), fading.alpha_irs, fading);
            cs.G[i][s] = draw_rician(rng, n_per[s], m_antennas, g, kappa);
        }
    for (int s = 0; s < l; ++s)
        for (int j = 0; j < k; ++j) {
            const double g = path_loss(link_distance(pos.irs[s], pos.rx[j]), fading.alpha_irs, fading);
            cs.f[s][j] = draw_rician(rng, n_per[s], 1, g, kappa).col(0);
        }

    cascade_and_stack(cs);
    return cs;
}

void cascade_and_stack(ChannelSet& channels) {
    const int k = channels.k_pairs;
    const int l = channels.irs_count();
    const int m = channels.m_antennas;
    channels.phi.assign(k, std::vector<std::vector<MatrixXcd>>(l, std::vector<MatrixXcd>(k)));
    channels.H.assign(k, std::vector<MatrixXcd>(k));

    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            MatrixXcd stacked(channels.n_total + 1, m);
            int row = 0;
            for (int s = 0; s < l; ++s) {
                const int n = channels.n_per_irs[s];
                if (channels.G[i][s].rows() != n || channels.G[i][s].cols() != m ||
                    channels.f[s][j].size() != n)
                    throw std::invalid_argument("cascade_and_stack: dimension mismatch");
                // phi = diag(f^H) G
                MatrixXcd p = channels.f[s][j].conjugate().asDiagonal() * channels.G[i][s];
                channels.phi[i][s][j] = p;
                stacked.middleRows(row, n) = p;
                row += n;
            }
            if (channels.h[i][j].size() != m)
                throw std::invalid_argument("cascade_and_stack: dimension mismatch");
            stacked.row(row) = channels.h[i][j].adjoint();
            channels.H[i][j] = stacked;
        }
}

}  // namespace riswipt
