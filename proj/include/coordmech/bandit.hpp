#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "coordmech/strategy.hpp"
#include "coordmech/transcript.hpp"

namespace coordmech {

/// Posterior summary of a Bernoulli arm: observation counts plus prior
/// pseudo-counts. The arm's Markov chain runs over these states with Bayes
/// transitions and reward equal to the posterior mean.
struct InfoState {
    long long successes = 0;
    long long failures = 0;
    double alpha = 1.0;
    double beta = 1.0;

    double success_prob() const {
        return (static_cast<double>(successes) + alpha) /
               (static_cast<double>(successes + failures) + alpha + beta);
    }
    bool operator==(const InfoState&) const = default;
};

/// Counts an observation string over {0,1} into an InfoState on top of the
/// base pseudo-counts. Rejects other characters.
InfoState parse_prior(const std::string& observations, double alpha0 = 1.0, double beta0 = 1.0);

struct InfoTransition {
    InfoState success;
    InfoState failure;
    double p_success;
};

/// Bayes-rule successor distribution of one activation.
InfoTransition info_transition(const InfoState& state);

/// Discount-tail truncation: ignore states deeper than H activations, where
/// gamma^H * r_max/(1-gamma) <= epsilon.
struct TruncationPolicy {
    double epsilon = 1e-6;
    double r_max = 1.0;
    int horizon_cap = 10000;

    /// H = ceil(ln(epsilon*(1-gamma)/r_max) / ln gamma), at least 1.
    /// Throws when H would exceed the cap.
    int horizon(double discount) const;
};

/// Gittins index of an information state on the chain truncated at depth H,
/// within epsilon*(1-gamma) of the untruncated index. Solved exactly per
/// restart-value candidate by one backward pass over the (s,f) triangle,
/// with a safeguarded secant iteration on the restart value.
double truncated_index(const InfoState& state, double discount, const TruncationPolicy& trunc);

/// Like truncated_index but with an explicit depth override (soundness
/// tests compare H against H+50).
double truncated_index_at_depth(const InfoState& state, double discount, int depth);

/// Memo for truthful truncated indices; sharing it across runs or replicas
/// cannot change results because the index is a pure function.
class IndexCache {
public:
    IndexCache(double discount, TruncationPolicy trunc) : discount_(discount), trunc_(trunc) {}
    double get(const InfoState& state);
    double discount() const { return discount_; }
    const TruncationPolicy& truncation() const { return trunc_; }

private:
    double discount_;
    TruncationPolicy trunc_;
    std::mutex mutex_;
    std::map<std::tuple<long long, long long, std::uint64_t, std::uint64_t>, double> cache_;
};

struct BanditArm {
    double ground_truth_p = 0.5; // scenario-level, hidden from the planner
    std::string prior_string;
};

struct LearningConfig {
    double discount = 0.9;
    TruncationPolicy trunc;
    int m = 16;
    int horizon = 200;
    std::uint64_t seed = 1;
};

/// Planner query for the index of a newly reached simulated information
/// state; answered by the owning agent's strategy.
struct FrontierRequest {
    int trajectory_set = 0; // the pi^{-trajectory_set} sample set
    int agent = 0;
    InfoState state;
};

/// Runs the learning mechanism: per period, collect state and index
/// reports, activate the argmax arm, pull it against the hidden ground
/// truth, advance all n*m marginal trajectories (issuing frontier requests
/// on first visits), and pay marginal-simulation transfers. Strategies
/// default to truthful when the list is empty.
Transcript run_learning_mechanism(const std::vector<BanditArm>& arms,
                                  const std::vector<Strategy>& strategies,
                                  const LearningConfig& config, IndexCache* cache = nullptr,
                                  PlannerCounters* counters = nullptr);

/// Equivalence oracle for the real activation path: a single planner that
/// computes every index itself from the same priors and seeds, with no
/// report boundary and no sample trajectories.
std::vector<int> centralized_gittins_decisions(const std::vector<BanditArm>& arms,
                                               const LearningConfig& config,
                                               IndexCache* cache = nullptr);

} // namespace coordmech
