#pragma once

#include "riswipt/channel.hpp"
#include "riswipt/conic.hpp"
#include "riswipt/metrics.hpp"
#include "riswipt/scheme_hybrid.hpp"  // AoOptions

namespace riswipt {

enum class TdmaVariant { tdma, tdma_d };

/// Iterate of the TDMA-family lifted problem: K^2 covariances W = tau*S,
/// per-slot time fractions, and per-slot phase vectors.
struct TdmaIterate {
    std::vector<std::vector<MatrixXcd>> W;  // [i][j]
    std::vector<double> tau;                // [j]
    std::vector<VectorXcd> v;               // [j]
};

/// Affine overestimator of q_k (interference-plus-noise log of slot k) at
/// the covariance expansion point.
struct TdmaQ {
    double lambda = 0.0;  // interference + noise at the point
    double constant = 0.0;
    std::vector<MatrixXcd> s_coef;  // [i], zero block at i == k

    double eval(const std::vector<MatrixXcd>& s_slot_k) const;
};

double tdma_q_exact(const std::vector<VectorXcd>& b_k, int k,
                    const std::vector<MatrixXcd>& s_slot_k, double sigma_sq);

TdmaQ surrogate_q(const std::vector<VectorXcd>& b_k, int k,
                  const std::vector<MatrixXcd>& s_t, double sigma_sq);

struct TdmaBlock1 {
    conic::Program program;
    std::vector<bool> active;  // slot built
    std::vector<std::vector<conic::VarId>> w;  // [i][j]
    std::vector<conic::VarId> tau;             // [j]
};

/// Covariance/time step. TDMA linearizes the interference term; TDMA-D has
/// no interference and needs no surrogate in this block.
TdmaBlock1 build_covariance_sdp(const ChannelSet& cs, const TdmaIterate& it,
                                const NoiseAndPower& np, const AoOptions& opt,
                                TdmaVariant variant, const std::vector<bool>& active);

struct TdmaBlock2 {
    conic::Program program;
    std::vector<bool> active;  // phase vector built for the slot
    std::vector<conic::VarId> v;
    std::vector<conic::VarId> mu;
};

TdmaBlock2 build_phase_qcqp(const ChannelSet& cs, const std::vector<std::vector<MatrixXcd>>& S,
                            const std::vector<double>& tau, const std::vector<VectorXcd>& v_t,
                            const NoiseAndPower& np, const AoOptions& opt, TdmaVariant variant);

std::vector<std::vector<MatrixXcd>> recover_covariances_tdma(
    const std::vector<std::vector<MatrixXcd>>& w, const std::vector<double>& tau,
    double tau_zero_tol);

SchemeSolution tdma_solution_from_iterate(const ChannelSet& cs, const TdmaIterate& it,
                                          const NoiseAndPower& np, Scheme scheme,
                                          double tau_zero_tol);

TdmaIterate tdma_iterate_from_solution(const SchemeSolution& sol);

/// AO over the two blocks from a feasible initial point, with exact-objective
/// acceptance. Throws std::domain_error on an infeasible initial point.
SchemeSolution ao_solve_tdma(const ChannelSet& cs, const NoiseAndPower& np, const AoOptions& opt,
                             TdmaVariant variant, const TdmaIterate& initial);

}  // namespace riswipt
