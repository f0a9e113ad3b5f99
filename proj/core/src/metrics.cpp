#include "riswipt/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace riswipt {

namespace {

constexpr double kEhScaleFloor = 1e-12;  // eps_abs in the EH slack denominator

// Re tr(a a^H S) = Re(a^H S a); signal/interference powers are this quantity.
double quad_power(const VectorXcd& a, const MatrixXcd& S) {
    return std::real(a.dot(S * a));  // Eigen dot conjugates the left operand
}

double log2_rate(double tau, double gamma) {
    return tau > 0.0 ? tau * std::log2(1.0 + gamma) : 0.0;
}

}  // namespace

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::hybrid: return "hybrid";
        case Scheme::ps: return "ps";
        case Scheme::ts: return "ts";
        case Scheme::tdma: return "tdma";
        case Scheme::tdma_d: return "tdma_d";
    }
    return "?";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "hybrid") return Scheme::hybrid;
    if (name == "ps") return Scheme::ps;
    if (name == "ts") return Scheme::ts;
    if (name == "tdma") return Scheme::tdma;
    if (name == "tdma_d") return Scheme::tdma_d;
    throw std::invalid_argument("unknown scheme: " + name);
}

bool is_hybrid_family(Scheme s) {
    return s == Scheme::hybrid || s == Scheme::ps || s == Scheme::ts;
}

NoiseAndPower NoiseAndPower::uniform(int k_pairs, double p_watt, double sigma_ant,
                                     double sigma_proc, double zeta, double e) {
    NoiseAndPower np;
    np.p_max.assign(k_pairs, p_watt);
    np.sigma_ant_sq.assign(k_pairs, sigma_ant);
    np.sigma_proc_sq.assign(k_pairs, sigma_proc);
    np.zeta = zeta;
    np.e_req.assign(k_pairs, e);
    return np;
}

VectorXcd effective_channel(const MatrixXcd& H_ik, const VectorXcd& v) {
    if (H_ik.rows() != v.size()) throw std::invalid_argument("effective_channel: dimension mismatch");
    return H_ik.adjoint() * v;
}

std::vector<double> sinr_hybrid_slot2(const ChannelSet& cs, const std::vector<MatrixXcd>& S2,
                                      const VectorXcd& v2, const std::vector<double>& rho,
                                      const NoiseAndPower& np) {
    const int k = cs.k_pairs;
    std::vector<double> out(k, 0.0);
    for (int j = 0; j < k; ++j) {
        if (rho[j] <= 0.0) continue;  // all power to EH: SINR defined as 0
        double signal = 0.0, interference = 0.0;
        for (int i = 0; i < k; ++i) {
            const VectorXcd a = effective_channel(cs.H[i][j], v2);
            const double p = quad_power(a, S2[i]);
            (i == j ? signal : interference) += p;
        }
        out[j] = signal / (interference + np.sigma_ant_sq[j] + np.sigma_proc_sq[j] / rho[j]);
    }
    return out;
}

std::vector<double> sinr_hybrid_slot3(const ChannelSet& cs, const std::vector<MatrixXcd>& S3,
                                      const VectorXcd& v3, const NoiseAndPower& np) {
    const int k = cs.k_pairs;
    std::vector<double> out(k, 0.0);
    for (int j = 0; j < k; ++j) {
        double signal = 0.0, interference = 0.0;
        for (int i = 0; i < k; ++i) {
            const VectorXcd a = effective_channel(cs.H[i][j], v3);
            const double p = quad_power(a, S3[i]);
            (i == j ? signal : interference) += p;
        }
        out[j] = signal / (interference + np.sigma_sq(j));
    }
    return out;
}

std::vector<double> sinr_tdma(const ChannelSet& cs, const std::vector<std::vector<MatrixXcd>>& S,
                              const std::vector<VectorXcd>& v, const NoiseAndPower& np) {
    const int k = cs.k_pairs;
    std::vector<double> out(k, 0.0);
    for (int j = 0; j < k; ++j) {
        double signal = 0.0, interference = 0.0;
        for (int i = 0; i < k; ++i) {
            const VectorXcd b = effective_channel(cs.H[i][j], v[j]);
            const double p = quad_power(b, S[i][j]);
            (i == j ? signal : interference) += p;
        }
        out[j] = signal / (interference + np.sigma_sq(j));
    }
    return out;
}

std::vector<double> sinr_tdma_d(const ChannelSet& cs, const std::vector<std::vector<MatrixXcd>>& S,
                                const std::vector<VectorXcd>& v, const NoiseAndPower& np) {
    const int k = cs.k_pairs;
    std::vector<double> out(k, 0.0);
    for (int j = 0; j < k; ++j) {
        const VectorXcd b = effective_channel(cs.H[j][j], v[j]);
        out[j] = quad_power(b, S[j][j]) / np.sigma_sq(j);
    }
    return out;
}

std::vector<double> harvested_energy_hybrid(const ChannelSet& cs,
                                            const std::vector<std::vector<MatrixXcd>>& S,
                                            const VectorXcd& v1, const VectorXcd& v2,
                                            const std::vector<double>& tau,
                                            const std::vector<double>& rho, double zeta) {
    const int k = cs.k_pairs;
    std::vector<double> q(k, 0.0);
    for (int j = 0; j < k; ++j) {
        double slot1 = 0.0, slot2 = 0.0;
        for (int i = 0; i < k; ++i) {
            slot1 += quad_power(effective_channel(cs.H[i][j], v1), S[i][0]);
            slot2 += quad_power(effective_channel(cs.H[i][j], v2), S[i][1]);
        }
        q[j] = zeta * tau[0] * slot1 + zeta * tau[1] * (1.0 - rho[j]) * slot2;
    }
    return q;
}

std::vector<double> harvested_energy_tdma(const ChannelSet& cs,
                                          const std::vector<std::vector<MatrixXcd>>& S,
                                          const std::vector<VectorXcd>& v,
                                          const std::vector<double>& tau, double zeta) {
    const int k = cs.k_pairs;
    std::vector<double> q(k, 0.0);
    for (int j = 0; j < k; ++j)
        for (int slot = 0; slot < k; ++slot) {
            if (slot == j) continue;
            double p = 0.0;
            for (int i = 0; i < k; ++i)
                p += quad_power(effective_channel(cs.H[i][j], v[slot]), S[i][slot]);
            q[j] += zeta * tau[slot] * p;
        }
    return q;
}

double sum_rate(const ChannelSet& cs, const SchemeSolution& sol, const NoiseAndPower& np) {
    double rate = 0.0;
    if (is_hybrid_family(sol.scheme)) {
        std::vector<MatrixXcd> s2(sol.k_pairs), s3(sol.k_pairs);
        for (int i = 0; i < sol.k_pairs; ++i) {
            s2[i] = sol.S[i][1];
            s3[i] = sol.S[i][2];
        }
        const auto g2 = sinr_hybrid_slot2(cs, s2, sol.v[1], sol.rho, np);
        const auto g3 = sinr_hybrid_slot3(cs, s3, sol.v[2], np);
        for (int k = 0; k < sol.k_pairs; ++k)
            rate += log2_rate(sol.tau[1], g2[k]) + log2_rate(sol.tau[2], g3[k]);
    } else {
        const auto g = sol.scheme == Scheme::tdma ? sinr_tdma(cs, sol.S, sol.v, np)
                                                  : sinr_tdma_d(cs, sol.S, sol.v, np);
        for (int k = 0; k < sol.k_pairs; ++k) rate += log2_rate(sol.tau[k], g[k]);
    }
    return rate;
}

std::vector<double> harvested_energy(const ChannelSet& cs, const SchemeSolution& sol,
                                     const NoiseAndPower& np) {
    if (is_hybrid_family(sol.scheme))
        return harvested_energy_hybrid(cs, sol.S, sol.v[0], sol.v[1], sol.tau, sol.rho, np.zeta);
    return harvested_energy_tdma(cs, sol.S, sol.v, sol.tau, np.zeta);
}

double ResidualReport::min_slack() const {
    return std::min({eh, power, time, tau_nonneg, rho_box, modulus, psd});
}

ResidualReport constraint_residuals(const ChannelSet& cs, const SchemeSolution& sol,
                                    const NoiseAndPower& np) {
    ResidualReport r;
    const auto q = harvested_energy(cs, sol, np);
    r.eh = 1e300;
    for (int k = 0; k < sol.k_pairs; ++k)
        r.eh = std::min(r.eh, (q[k] - np.e_req[k]) / std::max(np.e_req[k], kEhScaleFloor));

    r.power = 1e300;
    r.psd = 1e300;
    for (int i = 0; i < sol.k_pairs; ++i)
        for (int j = 0; j < sol.slots(); ++j) {
            const MatrixXcd& S = sol.S[i][j];
            r.power = std::min(r.power, (np.p_max[i] - std::real(S.trace())) / np.p_max[i]);
            Eigen::SelfAdjointEigenSolver<MatrixXcd> es(S, Eigen::EigenvaluesOnly);
            r.psd = std::min(r.psd, es.eigenvalues().minCoeff() / np.p_max[i]);
        }

    double tau_sum = 0.0;
    r.tau_nonneg = 1e300;
    for (double t : sol.tau) {
        tau_sum += t;
        r.tau_nonneg = std::min(r.tau_nonneg, t);
    }
    r.time = 1.0 - tau_sum;

    r.rho_box = 1e300;
    if (is_hybrid_family(sol.scheme))
        for (double p : sol.rho) r.rho_box = std::min({r.rho_box, p, 1.0 - p});
    else
        r.rho_box = 0.0;

    r.modulus = 1e300;
    for (const auto& v : sol.v) {
        const int n = static_cast<int>(v.size()) - 1;
        for (int e = 0; e < n; ++e) r.modulus = std::min(r.modulus, 1.0 - std::abs(v[e]));
        r.modulus = std::min(r.modulus, -std::abs(v[n] - std::complex<double>(1.0, 0.0)));
    }
    return r;
}

}  // namespace riswipt
