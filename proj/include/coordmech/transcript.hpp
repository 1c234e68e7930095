#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace coordmech {

/// Everything the planner and the world did in one period. MDP worlds fill
/// `action`; chain and bandit worlds fill `activated`. Bandit worlds also
/// carry information-state counts and the realized pull outcome.
struct PeriodRecord {
    int t = 0;
    std::vector<int> true_state;
    std::vector<int> reports;
    std::vector<int> action;
    int activated = -1;
    std::vector<double> rewards;    // realized intrinsic reward per agent
    std::vector<double> transfers;  // planner-to-agent payments
    std::vector<double> charges;    // charge component of each transfer
    std::vector<double> sim_rewards; // r(X, t) per sample trajectory
    // bandit worlds
    std::vector<std::pair<long long, long long>> info_counts; // true (successes, failures)
    std::vector<double> index_reports;
    int outcome = -1;
    int frontier_requests = 0;
};

/// Full per-episode record; replaying (scenario, seed) reproduces it
/// bit-exactly.
struct Transcript {
    std::string mechanism;
    std::uint64_t seed = 0;
    std::uint64_t scenario_hash = 0;
    double discount = 0.0;
    std::vector<PeriodRecord> periods;

    int horizon() const { return static_cast<int>(periods.size()); }
};

/// One CSV row per period; doubles are printed with round-trip precision.
void write_transcript_csv(const Transcript& transcript, std::ostream& out);

/// Per-agent charge stream, for bit-exact replay comparisons.
std::vector<std::vector<double>> charge_streams(const Transcript& transcript);

} // namespace coordmech
