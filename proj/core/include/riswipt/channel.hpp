#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace riswipt {

using Eigen::MatrixXcd;
using Eigen::Vector3d;
using Eigen::VectorXcd;

enum class Deployment { distributed, centralized };

/// Node layout of one network: K Tx-Rx pairs on a ring, IRSs either one per
/// Rx (distributed) or a single surface on the +z axis (centralized).
/// d_tx may be negative: the Tx ring is then rotated by pi (radius |d_tx|).
struct Geometry {
    int k_pairs = 2;
    double d_tx = 0.0;   // Tx radial distance [m], sign selects the half-plane
    double d_rx = 6.0;   // Rx radial distance [m]
    double d_irs = 1.0;  // IRS height above its reference point [m]
    Deployment deployment = Deployment::distributed;
    int n_total = 0;  // total reflecting elements over all IRSs

    int irs_count() const { return deployment == Deployment::distributed ? k_pairs : 1; }

    std::vector<int> elements_per_irs() const {
        const int l = irs_count();
        if (n_total % l != 0)
            throw std::invalid_argument("n_total must split evenly across IRSs");
        return std::vector<int>(static_cast<std::size_t>(l), n_total / l);
    }

    void validate() const {
        if (k_pairs < 1) throw std::invalid_argument("k_pairs must be >= 1");
        if (d_rx <= 0.0) throw std::invalid_argument("d_rx must be positive");
        if (d_irs <= 0.0) throw std::invalid_argument("d_irs must be positive");
        if (n_total < 0) throw std::invalid_argument("n_total must be >= 0");
        (void)elements_per_irs();
    }
};

/// Large-scale and small-scale fading parameters.
struct FadingParams {
    double pl_ref_db = -30.0;   // path loss at the 1 m reference distance
    double alpha_irs = 2.2;     // exponent for Tx->IRS and IRS->Rx links
    double alpha_direct = 3.5;  // exponent for Tx->Rx links
    double rician_db = 3.0;     // Rician factor on IRS-related links

    void validate() const {
        if (alpha_irs < 0.0 || alpha_direct < 0.0)
            throw std::invalid_argument("path loss exponents must be >= 0");
    }
};

struct NodePositions {
    std::vector<Vector3d> tx;
    std::vector<Vector3d> rx;
    std::vector<Vector3d> irs;
};

/// One realization of every link plus the cascaded/stacked compositions.
///
/// h[i][k]   : direct channel Tx i -> Rx k, length M (stored as a column;
///             the physical row channel is h^H)
/// G[i][l]   : Tx i -> IRS l, N_l x M
/// f[l][k]   : IRS l -> Rx k, length N_l (physical row channel f^H)
/// phi[i][l][k] = diag(f[l][k]^H) G[i][l], N_l x M
/// H[i][k]   : [phi[i][1][k]; ...; phi[i][L][k]; h[i][k]^H], (N+1) x M
struct ChannelSet {
    int k_pairs = 0;
    int m_antennas = 0;
    int n_total = 0;
    std::vector<int> n_per_irs;

    std::vector<std::vector<VectorXcd>> h;
    std::vector<std::vector<MatrixXcd>> G;
    std::vector<std::vector<VectorXcd>> f;
    std::vector<std::vector<std::vector<MatrixXcd>>> phi;
    std::vector<std::vector<MatrixXcd>> H;

    int irs_count() const { return static_cast<int>(n_per_irs.size()); }
    int v_dim() const { return n_total + 1; }
};

/// Deterministic coordinates for a geometry. Tx k sits at spherical
/// (|d_tx|, 2*pi*(k-1)/K (+pi when d_tx < 0), pi/2), Rx k at
/// (d_rx, 2*pi*(k-1)/K, pi/2); polar is measured from +z, so pi/2 is the
/// ground plane. Distributed IRS k is d_irs above Rx k; the centralized IRS
/// sits on the +z axis at height d_irs.
NodePositions place_nodes(const Geometry& geometry);

/// Linear power gain 10^(pl_ref_db/10) * d^(-exponent). Distances below 1 m
/// are clamped to 1 m so the gain never exceeds the reference.
double path_loss(double distance_m, double exponent, const FadingParams& params);

/// Draws one ChannelSet. Tx->Rx links are Rayleigh; IRS-related links are
/// Rician with an all-ones LoS component. Pure function of
/// (seed, geometry, fading, m_antennas); phi/H come back populated.
ChannelSet sample_channels(std::uint64_t seed, const Geometry& geometry,
                           const FadingParams& fading, int m_antennas);

/// Recomputes phi and H from h, G, f in place.
void cascade_and_stack(ChannelSet& channels);

}  // namespace riswipt
