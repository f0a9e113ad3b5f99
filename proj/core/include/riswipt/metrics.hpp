#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riswipt/channel.hpp"

namespace riswipt {

enum class Scheme { hybrid, ps, ts, tdma, tdma_d };

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);
bool is_hybrid_family(Scheme s);

/// Per-Rx noise figures, transmit power caps, and EH requirements.
/// sigma_ant_sq is the RF-band antenna noise, sigma_proc_sq the baseband
/// processing noise; slot-3/TDMA decoding sees their sum.
struct NoiseAndPower {
    std::vector<double> p_max;          // [i] watt
    std::vector<double> sigma_ant_sq;   // [k] watt
    std::vector<double> sigma_proc_sq;  // [k] watt
    double zeta = 0.7;                  // EH conversion efficiency
    std::vector<double> e_req;          // [k] watt * interval

    double sigma_sq(int k) const { return sigma_ant_sq[k] + sigma_proc_sq[k]; }

    static NoiseAndPower uniform(int k_pairs, double p_watt, double sigma_ant,
                                 double sigma_proc, double zeta, double e);
};

/// Converged (or candidate) operating point of one scheme on one channel
/// realization. Hybrid-family solutions have 3 slots and PS ratios; TDMA
/// family has K slots and no rho. v[j] has length N+1 with last entry 1.
struct SchemeSolution {
    Scheme scheme = Scheme::hybrid;
    int k_pairs = 0;
    int m_antennas = 0;
    std::vector<std::vector<MatrixXcd>> S;  // [i][j] transmit covariance, watt
    std::vector<double> tau;                // [j]
    std::vector<double> rho;                // [k], hybrid family only
    std::vector<VectorXcd> v;               // [j]
    bool feasible = false;
    double sum_rate = 0.0;
    std::vector<double> harvested;  // [k]
    int outer_iters = 0;
    std::vector<double> trace;  // objective after each accepted block update
    bool hit_iter_cap = false;
    bool solver_failure = false;

    int slots() const { return static_cast<int>(tau.size()); }
};

/// a = H^H v, so that a^H = v^H H (length M).
VectorXcd effective_channel(const MatrixXcd& H_ik, const VectorXcd& v);

/// Slot-2 SINR of the hybrid scheme, Eq.-(2) form. rho_k = 0 yields 0 by
/// convention (all power routed to EH).
std::vector<double> sinr_hybrid_slot2(const ChannelSet& cs,
                                      const std::vector<MatrixXcd>& S2, const VectorXcd& v2,
                                      const std::vector<double>& rho, const NoiseAndPower& np);

/// Slot-3 SINR; the denominator noise is sigma_ant_sq + sigma_proc_sq.
std::vector<double> sinr_hybrid_slot3(const ChannelSet& cs,
                                      const std::vector<MatrixXcd>& S3, const VectorXcd& v3,
                                      const NoiseAndPower& np);

/// TDMA SINR of Rx k in its own slot k (interference from energy signals).
std::vector<double> sinr_tdma(const ChannelSet& cs,
                              const std::vector<std::vector<MatrixXcd>>& S,
                              const std::vector<VectorXcd>& v, const NoiseAndPower& np);

/// TDMA-D SINR: energy signals are deterministic and cancelled.
std::vector<double> sinr_tdma_d(const ChannelSet& cs,
                                const std::vector<std::vector<MatrixXcd>>& S,
                                const std::vector<VectorXcd>& v, const NoiseAndPower& np);

/// Harvested energy per Rx for the hybrid scheme (slots 1 and 2).
std::vector<double> harvested_energy_hybrid(const ChannelSet& cs,
                                            const std::vector<std::vector<MatrixXcd>>& S,
                                            const VectorXcd& v1, const VectorXcd& v2,
                                            const std::vector<double>& tau,
                                            const std::vector<double>& rho, double zeta);

/// Harvested energy per Rx for the TDMA family (all slots j != k).
std::vector<double> harvested_energy_tdma(const ChannelSet& cs,
                                          const std::vector<std::vector<MatrixXcd>>& S,
                                          const std::vector<VectorXcd>& v,
                                          const std::vector<double>& tau, double zeta);

/// Exact objective value of the solution's scheme at the solution point.
double sum_rate(const ChannelSet& cs, const SchemeSolution& sol, const NoiseAndPower& np);

/// Harvested energies of the solution's scheme at the solution point.
std::vector<double> harvested_energy(const ChannelSet& cs, const SchemeSolution& sol,
                                     const NoiseAndPower& np);

/// Worst-case slack per constraint group, relative where a natural scale
/// exists. A solution is feasible iff every entry >= -1e-6.
struct ResidualReport {
    double eh = 0.0;       // min_k (Q_k - E_k) / max(E_k, eps_abs)
    double power = 0.0;    // min_{i,j} (P_i - tr S_{i,j}) / P_i
    double time = 0.0;     // 1 - sum tau
    double tau_nonneg = 0.0;
    double rho_box = 0.0;  // hybrid family; 0 otherwise
    double modulus = 0.0;  // min_n (1 - |v_n|) and -(deviation of last entry)
    double psd = 0.0;      // min eigenvalue of S, relative to P_i
    double min_slack() const;
    bool feasible(double tol = 1e-6) const { return min_slack() >= -tol; }
};

ResidualReport constraint_residuals(const ChannelSet& cs, const SchemeSolution& sol,
                                    const NoiseAndPower& np);

}  // namespace riswipt
