#pragma once

#include <string>
#include <vector>

#include "coordmech/model.hpp"
#include "coordmech/solver.hpp"

namespace coordmech {

/// Payment from the planner to each agent for one period; negative entries
/// are charges.
using TransferVector = std::vector<double>;

/// Per-agent per-period constant charge c_i = (1-gamma) * V*_{-i}(s0).
/// Computed exclusively from the model and s0, never from agent i's reports.
struct ChargeSchedule {
    std::vector<double> charge;
};

/// Pays each agent the sum of the other agents' period rewards, evaluated
/// at their reported states and assigned action components.
TransferVector groves_transfers(const JointModel& model, const JointState& reports,
                                std::span<const int> action);

/// c_i = (1-gamma) * evaluate_policy_subset(model, policy, i, s0), exact.
ChargeSchedule precompute_vcg_charges(const JointModel& model, const Policy& policy,
                                      const JointState& s0);

/// Groves payment minus the precomputed per-agent constant charge.
TransferVector vcg_transfers(const JointModel& model, const JointState& reports,
                             std::span<const int> action, const ChargeSchedule& charges);

enum class MechanismKind { groves, vcg };

/// Knobs for deliberately broken transfer rules, used as negative controls
/// in the truthfulness tests. Defaults leave the mechanism intact.
struct DeviationOptions {
    bool withhold_payments = false;    // drop the Groves payment entirely
    bool self_reported_charge = false; // recompute the charge from the current reported state
    double tol = 1e-12;                // value-iteration residual for the oracle MDPs
};

/// Exact one-agent deviation oracle. The deviator observes the true joint
/// state (the strongest deviation model), chooses a report each period, the
/// planner responds with pi*(report, others' truthful reports), and the
/// deviator collects its true-state reward plus its transfer. Solving this
/// MDP bounds what any reporting strategy can achieve.
struct BestResponse {
    std::vector<double> deviation_value;  // optimal value per true joint state
    std::vector<int> report_policy;       // an optimal report per true joint state
    std::vector<double> truthful_value;   // value of always reporting the truth
    double max_gap = 0.0;                 // max over states of deviation - truthful
};

BestResponse best_response_value(const JointModel& model, MechanismKind mechanism, int deviator,
                                 const DeviationOptions& options = {});

} // namespace coordmech
