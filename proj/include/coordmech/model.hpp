#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coordmech/rng.hpp"

namespace coordmech {

/// One agent's local world: a finite MDP with a distinguished null action.
/// States and actions are referred to by index; names are kept for I/O.
struct AgentModel {
    int id = 0;
    std::vector<std::string> states;
    std::vector<std::string> actions;
    int null_action = -1;
    // transition[s][a] is a dense probability row over successor states
    std::vector<std::vector<std::vector<double>>> transition;
    // reward[s][a] >= 0
    std::vector<std::vector<double>> reward;

    int state_count() const { return static_cast<int>(states.size()); }
    int action_count() const { return static_cast<int>(actions.size()); }

    int state_index(const std::string& name) const;
    int action_index(const std::string& name) const;

    /// Throws std::invalid_argument on malformed rows, negative rewards,
    /// or a missing null action.
    void validate() const;
};

/// Restriction of AgentModel to a Markov chain: one activate action plus
/// null. Reward accrues only under activate; null freezes the state.
struct MarkovChainModel {
    int id = 0;
    std::vector<std::string> states;
    std::vector<double> reward;                    // per state, under activate
    std::vector<std::vector<double>> transition;   // per state, under activate

    int state_count() const { return static_cast<int>(states.size()); }
    void validate() const;

    /// Two-action AgentModel view ({activate, null}) for joint composition.
    AgentModel to_agent_model() const;
    static MarkovChainModel from_agent_model(const AgentModel& m);
};

struct Feasibility {
    enum class Kind { all, single_activation, explicit_list };
    Kind kind = Kind::all;
    // explicit_list only: allowed joint actions as per-agent action indices
    std::vector<std::vector<int>> allowed;

    bool accepts(std::span<const AgentModel> agents, std::span<const int> action) const;
};

/// Joint state: one local state index per agent, ordered by agent id.
using JointState = std::vector<int>;

/// Composed multi-agent model. The joint state space is the Cartesian
/// product of the local spaces and local kernels are independent given the
/// joint action; feasible joint actions are enumerated once, in
/// lexicographic order (agent 0 most significant), which fixes the global
/// tie-break ordering used by greedy policy extraction.
class JointModel {
public:
    JointModel() = default;

    const std::vector<AgentModel>& agents() const { return agents_; }
    int agent_count() const { return static_cast<int>(agents_.size()); }
    double discount() const { return discount_; }
    const Feasibility& feasibility() const { return feasibility_; }

    std::size_t joint_state_count() const { return joint_states_; }
    const std::vector<std::vector<int>>& feasible_actions() const { return feasible_actions_; }
    std::span<const std::size_t> strides() const { return stride_; }

    /// Decodes into a caller-provided buffer of agent_count() entries.
    void decode_into(std::size_t index, std::span<int> out) const;

    std::size_t encode(std::span<const int> local_states) const;
    JointState decode(std::size_t index) const;

    /// Per-agent period reward of a feasible joint action at local states.
    double agent_reward(std::span<const int> local_states, std::span<const int> action, int agent) const;
    double total_reward(std::span<const int> local_states, std::span<const int> action) const;

    friend JointModel build_joint(std::vector<AgentModel> agents, Feasibility feasibility,
                                  double discount);

private:
    std::vector<AgentModel> agents_;
    Feasibility feasibility_;
    double discount_ = 0.0;
    std::size_t joint_states_ = 0;
    std::vector<std::size_t> stride_;
    std::vector<std::vector<int>> feasible_actions_;
};

/// Composes local models into a JointModel. Rejects empty agent lists,
/// discounts outside (0,1), malformed local models, joint spaces above the
/// desk-scale cap of 1e6 states, and feasibility rules that exclude the
/// all-null action.
JointModel build_joint(std::vector<AgentModel> agents, Feasibility feasibility, double discount);

/// Samples one period: each agent's successor is drawn independently from
/// its local kernel (one uniform consumed per agent, even for deterministic
/// rows, so paired runs stay aligned). Returns the successor and the
/// per-agent reward vector. Rejects infeasible actions.
std::pair<JointState, std::vector<double>> step(const JointModel& model, const JointState& s,
                                                std::span<const int> action, RngStream& rng);

} // namespace coordmech
