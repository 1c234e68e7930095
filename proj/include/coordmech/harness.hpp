#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "coordmech/bandit.hpp"
#include "coordmech/gittins.hpp"
#include "coordmech/mechanisms.hpp"
#include "coordmech/scenario.hpp"
#include "coordmech/solver.hpp"
#include "coordmech/strategy.hpp"
#include "coordmech/transcript.hpp"

namespace coordmech {

/// Everything derived once per scenario before episodes run: the optimal
/// joint plan and charges for MDP worlds, index tables for chain worlds,
/// and a shared truthful-index cache for bandit worlds.
struct SolvedScenario {
    // mdp / chain
    SolveResult vi;
    Policy policy;
    std::vector<std::vector<double>> subset_value; // per excluded agent, per joint state
    ChargeSchedule charges;                        // anchored at s0
    // chain
    std::vector<MarkovChainModel> chains;
    std::vector<GittinsTable> tables;
    // bandit
    std::shared_ptr<IndexCache> index_cache;
};

SolvedScenario solve_scenario(const Scenario& scenario);

/// Smallest horizon with gamma^T below 1e-8, so truncating the infinite
/// payoff stream changes discounted sums by less than 1e-8 of scale.
int default_horizon(double discount);
int effective_horizon(const Scenario& scenario);

/// Discounted per-episode accounting. Payoffs are intrinsic reward plus
/// transfers; welfare is the sum of intrinsic rewards; net transfer flow is
/// reported both bare and with world rewards routed through the planner.
struct EpisodeMetrics {
    std::vector<double> agent_reward;
    std::vector<double> agent_transfer;
    std::vector<double> agent_payoff;
    double welfare = 0.0;
    double net_transfer = 0.0;
    double net_transfer_with_world = 0.0;
    std::vector<int> agent_ir_violations;          // periods with payoff < -1e-9
    std::vector<std::vector<double>> period_payoff; // [agent][t], undiscounted
};

EpisodeMetrics summarize_episode(const Transcript& transcript);

/// Monte Carlo aggregate of one scalar metric.
struct MetricReport {
    double mean = 0.0;
    double stderr_ = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    long long replicas = 0;
};

/// Runs one episode of the scenario's mechanism: report -> decide ->
/// transfer -> transition for `horizon` periods, deterministic given seed.
Transcript run_episode(const Scenario& scenario, const SolvedScenario& solved,
                       std::span<const Strategy> strategies, int horizon, std::uint64_t seed,
                       PlannerCounters* counters = nullptr);

/// Independent episodes with per-replica derived seeds; the reduction is a
/// deterministic fold over replica order, so thread count cannot change the
/// report.
MetricReport estimate(const Scenario& scenario, const SolvedScenario& solved,
                      std::span<const Strategy> strategies, int horizon, long long replicas,
                      std::uint64_t master_seed,
                      const std::function<double(const Transcript&)>& metric);

/// Paired-seed comparison: per replica, the deviator's payoff under its
/// deviation minus under truth, with common random numbers.
MetricReport deviation_gain(const Scenario& scenario, const SolvedScenario& solved,
                            const Strategy& deviation, int horizon, long long replicas,
                            std::uint64_t master_seed);

/// All-truthful strategy profile for n agents.
std::vector<Strategy> truthful_profile(int agent_count);

} // namespace coordmech
