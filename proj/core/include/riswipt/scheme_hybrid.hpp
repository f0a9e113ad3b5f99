#pragma once

#include <array>
#include <optional>

#include "riswipt/channel.hpp"
#include "riswipt/conic.hpp"
#include "riswipt/metrics.hpp"

namespace riswipt {

/// Shared knobs of the alternating optimizers.
struct AoOptions {
    double epsilon = 1e-4;        // stop when the fractional objective increase drops below
    int max_outer_iters = 100;
    double clamp = 1e-8;          // floor on expansion-point tau/rho/e and SINRs
    double tau_zero_tol = 1e-6;   // slot counts as off in covariance recovery
    double slot_off_tol = 1e-5;   // re-solve with slots below this removed
    double sinr_pin_tol = 1e-9;   // SINR below this is held at zero in phase steps
    conic::SolveOptions solver = default_solver();

    static conic::SolveOptions default_solver() {
        conic::SolveOptions so;
        so.tol = 1e-8;
        so.accept_tol = 1e-7;
        so.max_iters = 50000;
        return so;
    }
};

enum class HybridVariant { hybrid, ps_only, ts_only };

HybridVariant variant_of(Scheme s);
std::array<bool, 3> hybrid_active_slots(HybridVariant v);

/// One iterate of the lifted problem: W = tau*S plus the slack variables of
/// the transformed formulation and the per-slot phase vectors.
struct HybridIterate {
    std::vector<std::vector<MatrixXcd>> W;  // [i][j], watt*interval
    std::array<double, 3> tau{0.0, 0.0, 0.0};
    std::vector<double> rho;  // [k]
    std::vector<double> e;    // [k], e_k >= tau_2/rho_k
    std::vector<double> z;    // [k], EH-splitting slack
    std::vector<VectorXcd> v;  // [j], length N+1, last entry 1
};

/// Affine overestimator of g_{k,2} (interference-plus-noise log term of the
/// PS slot) at a clamped expansion point.
struct HybridG2 {
    double psi = 0.0;      // interference/tau + e*sig_proc/tau + sig_ant at the point
    double constant = 0.0;
    std::vector<MatrixXcd> w_coef;  // [i], zero block at i == k
    double e_coef = 0.0;
    double tau_coef = 0.0;

    double eval(const std::vector<MatrixXcd>& w2, double e, double tau2) const;
};

/// Exact g_{k,2} (0 at tau = 0 by the perspective closure).
double hybrid_g2_exact(const std::vector<VectorXcd>& a2, int k,
                       const std::vector<MatrixXcd>& w2, double e, double tau2,
                       double sigma_ant_sq, double sigma_proc_sq);

HybridG2 surrogate_g2(const std::vector<VectorXcd>& a2, int k,
                      const std::vector<MatrixXcd>& w2_t, double e_t, double tau2_t,
                      double sigma_ant_sq, double sigma_proc_sq, double clamp);

/// Slot-3 analogue (no PS slack in the denominator).
struct HybridG3 {
    double psi = 0.0;
    double constant = 0.0;
    std::vector<MatrixXcd> w_coef;
    double tau_coef = 0.0;

    double eval(const std::vector<MatrixXcd>& w3, double tau3) const;
};

double hybrid_g3_exact(const std::vector<VectorXcd>& a3, int k,
                       const std::vector<MatrixXcd>& w3, double tau3, double sigma_sq);

HybridG3 surrogate_g3(const std::vector<VectorXcd>& a3, int k,
                      const std::vector<MatrixXcd>& w3_t, double tau3_t, double sigma_sq,
                      double clamp);

/// Lifted-variable block: maximizes the SCA lower bound over
/// {W, tau, rho, e, z} at fixed phases. Slot j is built only when active[j].
struct HybridBlock1 {
    conic::Program program;
    std::array<bool, 3> active{};
    std::vector<std::array<conic::VarId, 3>> w;  // [i][j]
    std::array<conic::VarId, 3> tau{};
    std::vector<conic::VarId> rho, e, z;
};

HybridBlock1 build_block1_program(const ChannelSet& cs, const HybridIterate& it,
                                  const NoiseAndPower& np, const AoOptions& opt,
                                  const std::array<bool, 3>& active);

/// S = W/tau per slot (0 when tau is below tau_zero_tol), eigenvalue-clipped
/// to the PSD cone.
std::vector<std::vector<MatrixXcd>> recover_covariances(
    const std::vector<std::vector<MatrixXcd>>& w, const std::array<double, 3>& tau,
    double tau_zero_tol);

/// Phase block: maximizes sum of tau_j log2(1+mu) over {v_j, mu} via the
/// quadratic lower bounds, at fixed covariances and allocation.
struct HybridBlock2 {
    conic::Program program;
    std::array<bool, 3> active{};  // phase vector built for the slot
    std::array<conic::VarId, 3> v{};
    std::vector<std::array<conic::VarId, 2>> mu;  // [k][slot2, slot3]
};

HybridBlock2 build_block2_program(const ChannelSet& cs,
                                  const std::vector<std::vector<MatrixXcd>>& S,
                                  const std::array<double, 3>& tau,
                                  const std::vector<double>& rho,
                                  const std::vector<VectorXcd>& v_t, const NoiseAndPower& np,
                                  const AoOptions& opt);

/// Exact (P1) objective of an iterate, via the metrics evaluators.
double hybrid_objective(const ChannelSet& cs, const HybridIterate& it, const NoiseAndPower& np,
                        double tau_zero_tol);

SchemeSolution hybrid_solution_from_iterate(const ChannelSet& cs, const HybridIterate& it,
                                            const NoiseAndPower& np, Scheme scheme,
                                            double tau_zero_tol);

HybridIterate hybrid_iterate_from_solution(const SchemeSolution& sol, const NoiseAndPower& np,
                                           double clamp);

/// Algorithm: alternate the two blocks from a feasible initial point, with
/// exact-objective acceptance of each block update. Throws std::domain_error
/// on an infeasible initial point.
SchemeSolution ao_solve_hybrid(const ChannelSet& cs, const NoiseAndPower& np,
                               const AoOptions& opt, HybridVariant variant,
                               const HybridIterate& initial);

}  // namespace riswipt
