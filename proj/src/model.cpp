#include "coordmech/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coordmech {

namespace {
constexpr double kRowSumTol = 1e-12;
constexpr std::size_t kMaxJointStates = 1000000;
} // namespace

int AgentModel::state_index(const std::string& name) const {
    auto it = std::find(states.begin(), states.end(), name);
    if (it == states.end())
        throw std::invalid_argument("agent " + std::to_string(id) + ": unknown state '" + name + "'");
    return static_cast<int>(it - states.begin());
}

int AgentModel::action_index(const std::string& name) const {
    auto it = std::find(actions.begin(), actions.end(), name);
    if (it == actions.end())
        throw std::invalid_argument("agent " + std::to_string(id) + ": unknown action '" + name + "'");
    return static_cast<int>(it - actions.begin());
}

void AgentModel::validate() const {
    const std::string tag = "agent " + std::to_string(id) + ": ";
    if (states.empty()) throw std::invalid_argument(tag + "no states");
    if (actions.empty()) throw std::invalid_argument(tag + "no actions");
    if (null_action < 0 || null_action >= action_count())
        throw std::invalid_argument(tag + "missing null action");
    if (transition.size() != states.size() || reward.size() != states.size())
        throw std::invalid_argument(tag + "transition/reward tables sized off the state set");
    for (int s = 0; s < state_count(); ++s) {
        if (transition[s].size() != actions.size() || reward[s].size() != actions.size())
            throw std::invalid_argument(tag + "transition/reward tables sized off the action set");
        for (int a = 0; a < action_count(); ++a) {
            const auto& row = transition[s][a];
            if (row.size() != states.size())
                throw std::invalid_argument(tag + "transition row has wrong length");
            double sum = 0.0;
            for (double p : row) {
                if (p < 0.0 || !std::isfinite(p))
                    throw std::invalid_argument(tag + "transition row has invalid probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowSumTol)
                throw std::invalid_argument(tag + "transition row does not sum to 1");
            if (reward[s][a] < 0.0 || !std::isfinite(reward[s][a]))
                throw std::invalid_argument(tag + "negative or non-finite reward");
        }
    }
}

void MarkovChainModel::validate() const {
    const std::string tag = "chain " + std::to_string(id) + ": ";
    if (states.empty()) throw std::invalid_argument(tag + "no states");
    if (reward.size() != states.size() || transition.size() != states.size())
        throw std::invalid_argument(tag + "reward/transition sized off the state set");
    for (int s = 0; s < state_count(); ++s) {
        if (reward[s] < 0.0 || !std::isfinite(reward[s]))
            throw std::invalid_argument(tag + "negative or non-finite reward");
        const auto& row = transition[s];
        if (row.size() != states.size())
            throw std::invalid_argument(tag + "transition row has wrong length");
        double sum = 0.0;
        for (double p : row) {
            if (p < 0.0 || !std::isfinite(p))
                throw std::invalid_argument(tag + "transition row has invalid probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
            throw std::invalid_argument(tag + "transition row does not sum to 1");
    }
}

AgentModel MarkovChainModel::to_agent_model() const {
    validate();
    AgentModel m;
    m.id = id;
    m.states = states;
    m.actions = {"act", "null"};
    m.null_action = 1;
    const int n = state_count();
    m.transition.assign(n, std::vector<std::vector<double>>(2, std::vector<double>(n, 0.0)));
    m.reward.assign(n, std::vector<double>(2, 0.0));
    for (int s = 0; s < n; ++s) {
        m.transition[s][0] = transition[s];
        m.transition[s][1][s] = 1.0; // null freezes the state
        m.reward[s][0] = reward[s];
    }
    return m;
}

MarkovChainModel MarkovChainModel::from_agent_model(const AgentModel& m) {
    m.validate();
    if (m.action_count() != 2)
        throw std::invalid_argument("chain view requires exactly one non-null action");
    const int act = m.null_action == 0 ? 1 : 0;
    const int n = m.state_count();
    for (int s = 0; s < n; ++s) {
        if (m.transition[s][m.null_action][s] != 1.0)
            throw std::invalid_argument("chain view requires the null action to self-loop");
        if (m.reward[s][m.null_action] != 0.0)
            throw std::invalid_argument("chain view requires zero reward under null");
    }
    MarkovChainModel c;
    c.id = m.id;
    c.states = m.states;
    c.reward.resize(n);
    c.transition.resize(n);
    for (int s = 0; s < n; ++s) {
        c.reward[s] = m.reward[s][act];
        c.transition[s] = m.transition[s][act];
    }
    return c;
}

bool Feasibility::accepts(std::span<const AgentModel> agents, std::span<const int> action) const {
    switch (kind) {
    case Kind::all:
        return true;
    case Kind::single_activation: {
        int active = 0;
        for (std::size_t i = 0; i < agents.size(); ++i)
            if (action[i] != agents[i].null_action) ++active;
        return active <= 1;
    }
    case Kind::explicit_list:
        for (const auto& allowed_action : allowed) {
            if (allowed_action.size() != action.size()) continue;
            if (std::equal(allowed_action.begin(), allowed_action.end(), action.begin()))
                return true;
        }
        return false;
    }
    return false;
}

JointModel build_joint(std::vector<AgentModel> agents, Feasibility feasibility, double discount) {
    if (agents.empty()) throw std::invalid_argument("build_joint: need at least one agent");
    if (!(discount > 0.0 && discount < 1.0))
        throw std::invalid_argument("build_joint: discount must lie strictly inside (0,1)");
    for (auto& a : agents) a.validate();

    JointModel m;
    m.agents_ = std::move(agents);
    m.feasibility_ = std::move(feasibility);
    m.discount_ = discount;

    const int n = m.agent_count();
    m.stride_.assign(n, 1);
    std::size_t total = 1;
    for (int i = n - 1; i >= 0; --i) {
        m.stride_[i] = total;
        const std::size_t k = static_cast<std::size_t>(m.agents_[i].state_count());
        if (total > kMaxJointStates / k)
            throw std::invalid_argument("build_joint: joint state space exceeds the 1e6 cap");
        total *= k;
    }
    m.joint_states_ = total;

    // enumerate feasible joint actions in lexicographic order
    std::vector<int> action(n, 0);
    while (true) {
        if (m.feasibility_.accepts(m.agents_, action)) m.feasible_actions_.push_back(action);
        int i = n - 1;
        for (; i >= 0; --i) {
            if (++action[i] < m.agents_[i].action_count()) break;
            action[i] = 0;
        }
        if (i < 0) break;
    }
    if (m.feasible_actions_.empty())
        throw std::invalid_argument("build_joint: no feasible joint action");

    std::vector<int> all_null(n);
    for (int i = 0; i < n; ++i) all_null[i] = m.agents_[i].null_action;
    if (!m.feasibility_.accepts(m.agents_, all_null))
        throw std::invalid_argument("build_joint: the all-null joint action must be feasible");

    return m;
}

std::size_t JointModel::encode(std::span<const int> local_states) const {
    std::size_t idx = 0;
    for (int i = 0; i < agent_count(); ++i) {
        const int s = local_states[i];
        if (s < 0 || s >= agents_[i].state_count())
            throw std::invalid_argument("encode: local state out of range");
        idx += static_cast<std::size_t>(s) * stride_[i];
    }
    return idx;
}

JointState JointModel::decode(std::size_t index) const {
    JointState s(agent_count());
    decode_into(index, s);
    return s;
}

void JointModel::decode_into(std::size_t index, std::span<int> out) const {
    for (int i = 0; i < agent_count(); ++i) {
        out[i] = static_cast<int>(index / stride_[i]);
        index %= stride_[i];
    }
}

double JointModel::agent_reward(std::span<const int> local_states, std::span<const int> action,
                                int agent) const {
    return agents_[agent].reward[local_states[agent]][action[agent]];
}

double JointModel::total_reward(std::span<const int> local_states, std::span<const int> action) const {
    double r = 0.0;
    for (int i = 0; i < agent_count(); ++i) r += agent_reward(local_states, action, i);
    return r;
}

std::pair<JointState, std::vector<double>> step(const JointModel& model, const JointState& s,
                                                std::span<const int> action, RngStream& rng) {
    const int n = model.agent_count();
    if (static_cast<int>(s.size()) != n || static_cast<int>(action.size()) != n)
        throw std::invalid_argument("step: state/action arity mismatch");
    if (!model.feasibility().accepts(model.agents(), action))
        throw std::invalid_argument("step: infeasible joint action");

    JointState next(n);
    std::vector<double> rewards(n);
    for (int i = 0; i < n; ++i) {
        const auto& agent = model.agents()[i];
        rewards[i] = agent.reward[s[i]][action[i]];
        next[i] = rng.categorical(agent.transition[s[i]][action[i]]);
    }
    return {std::move(next), std::move(rewards)};
}

} // namespace coordmech
