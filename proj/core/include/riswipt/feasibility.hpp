#pragma once

#include "riswipt/scheme_hybrid.hpp"
#include "riswipt/scheme_tdma.hpp"

namespace riswipt {

/// Outcome of the hybrid-family feasibility check: alternating maximization
/// of the EH margin delta = 1/tau_1 achievable in a dedicated energy slot.
struct HybridFeasibility {
    bool feasible = false;
    double delta = 0.0;             // attained margin; +inf when E = 0
    std::vector<MatrixXcd> s1;      // EH covariances at the margin
    VectorXcd v1;                   // EH phase vector at the margin
    bool solver_flag = false;       // conservative verdict after a backend failure
    std::vector<double> delta_trace;
};

HybridFeasibility hybrid_feasibility(const ChannelSet& cs, const NoiseAndPower& np,
                                     const AoOptions& opt, std::uint64_t seed);

/// Feasible starting iterate for ao_solve_hybrid under the given variant.
/// Throws std::domain_error when the report says infeasible.
HybridIterate hybrid_initial_point(const HybridFeasibility& report, const ChannelSet& cs,
                                   const NoiseAndPower& np, const AoOptions& opt,
                                   std::uint64_t seed, HybridVariant variant);

/// TDMA-family check: alternating minimization of the total time needed to
/// meet every EH requirement; feasible iff it fits in the unit interval.
struct TdmaFeasibility {
    bool feasible = false;
    double total_time = 0.0;
    TdmaIterate witness;
    bool solver_flag = false;
    std::vector<double> time_trace;
};

TdmaFeasibility tdma_feasibility(const ChannelSet& cs, const NoiseAndPower& np,
                                 const AoOptions& opt, std::uint64_t seed);

/// Witness reused directly as the AO start: leftover time is distributed
/// proportionally (uniform slots with MRT covariances when E = 0).
TdmaIterate tdma_initial_point(const TdmaFeasibility& report, const ChannelSet& cs,
                               const NoiseAndPower& np, std::uint64_t seed);

}  // namespace riswipt
