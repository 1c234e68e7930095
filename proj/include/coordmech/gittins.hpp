#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "coordmech/mechanisms.hpp"
#include "coordmech/model.hpp"
#include "coordmech/rng.hpp"

namespace coordmech {

/// Per-agent map from local state to allocation index, in per-period reward
/// units: a constant chain with reward c has index c in every state.
struct GittinsTable {
    int agent = 0;
    std::vector<double> index; // one entry per local state
};

/// Planner work instrumentation. `index_comparisons` counts pairwise scans
/// inside each argmax; `argmax_decisions` counts argmax invocations (one per
/// trajectory per period plus the real decision).
struct PlannerCounters {
    long long index_comparisons = 0;
    long long argmax_decisions = 0;
};

/// Allocation index of `target` via the restart-in-target formulation: a
/// two-action MDP over the chain's states (continue from x, or restart from
/// `target`), solved by value iteration to sup-norm residual <= tol. The
/// index is (1-gamma) * V(target).
double gittins_index(const MarkovChainModel& chain, int target, double discount,
                     double tol = 1e-12);

/// Whole-chain table; the per-target restart MDPs are independent, so they
/// are solved in parallel. The serial variant is the reference kernel.
GittinsTable gittins_table(const MarkovChainModel& chain, double discount, double tol = 1e-12);
GittinsTable gittins_table_serial(const MarkovChainModel& chain, double discount,
                                  double tol = 1e-12);

/// Agent with maximal index at its reported state; ties go to the lowest
/// agent id. `eligible` masks agents out of the argmax (marginal worlds).
/// Throws when no agent is eligible or a state is out of table range.
int argmax_index(std::span<const GittinsTable> tables, std::span<const int> states,
                 std::span<const char> eligible, PlannerCounters* counters = nullptr);

/// Full-eligibility argmax over all agents.
int index_policy(std::span<const GittinsTable> tables, std::span<const int> states,
                 PlannerCounters* counters = nullptr);

/// One simulated sample path. `excluded` = -1 simulates pi*, otherwise the
/// marginal policy pi^{-excluded}. Each trajectory owns a dedicated rng
/// stream derived from (master seed, trajectory label, replica), so adding
/// trajectories never perturbs the real execution path.
struct SampleTrajectory {
    int excluded = -1;
    int replica = 0;
    std::vector<int> states;        // simulated local state per agent
    std::vector<double> reward_log; // r(X, t) per period
    RngStream rng;
};

SampleTrajectory make_trajectory(std::span<const MarkovChainModel> chains,
                                 std::span<const int> s0, int excluded, int replica,
                                 std::uint64_t master_seed);

/// Advances every trajectory one period: picks the argmax-index eligible
/// agent at the simulated states, logs the realized system reward, and
/// samples that chain's transition with the trajectory's own stream.
void advance_samples(std::span<SampleTrajectory> trajectories,
                     std::span<const MarkovChainModel> chains,
                     std::span<const GittinsTable> reported, PlannerCounters* counters = nullptr);

/// Mechanism transfers from simulated-path rewards at period t. The
/// activated agent pays the sample-average simulated system reward; every
/// other agent receives the activated agent's reported-state reward minus
/// the same average (sgv) or minus its own marginal-world average (dgv).
/// The charge component alone is returned through `charges_out` when
/// non-null. Both reject m = 0.
TransferVector sgv_transfers(int activated, double reported_reward,
                             std::span<const SampleTrajectory> star_samples, std::size_t t,
                             int agent_count, std::vector<double>* charges_out = nullptr);

TransferVector dgv_transfers(int activated, double reported_reward,
                             std::span<const std::vector<SampleTrajectory>> marginal_sets,
                             std::size_t t, std::vector<double>* charges_out = nullptr);

/// Planner-side tables after applying per-agent overrides (deviation
/// experiments); no overrides is the identity.
std::vector<GittinsTable> reported_tables(std::span<const GittinsTable> truth,
                                          const std::map<int, GittinsTable>& overrides);

} // namespace coordmech
