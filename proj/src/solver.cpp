#include "coordmech/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace coordmech {

namespace {

constexpr std::size_t kMaxSweeps = 2000000;
constexpr std::size_t kDenseCutoff = 2500;
constexpr int kMaxAgents = 32;

// Expected successor value of one (state, action) pair: the joint kernel is
// the product of local kernels, so the expectation contracts one agent at a
// time instead of enumerating the full product support.
double expected_next_value(const JointModel& model, std::span<const double> value,
                           std::span<const int> local, std::span<const int> action, int agent,
                           std::size_t base) {
    const auto& row = model.agents()[agent].transition[local[agent]][action[agent]];
    const std::size_t stride = model.strides()[agent];
    const bool last = agent + 1 == model.agent_count();
    double acc = 0.0;
    for (int nxt = 0; nxt < static_cast<int>(row.size()); ++nxt) {
        const double p = row[nxt];
        if (p == 0.0) continue;
        const std::size_t idx = base + static_cast<std::size_t>(nxt) * stride;
        acc += p * (last ? value[idx]
                         : expected_next_value(model, value, local, action, agent + 1, idx));
    }
    return acc;
}

double q_value(const JointModel& model, std::span<const double> value, std::span<const int> local,
               std::span<const int> action) {
    const double r = model.total_reward(local, action);
    return r + model.discount() * expected_next_value(model, value, local, action, 0, 0);
}

template <bool kParallel>
SolveResult run_value_iteration(const JointModel& model, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("value_iterate: tol must be positive");
    const std::size_t ns = model.joint_state_count();

    std::vector<double> v(ns, 0.0), w(ns, 0.0), residuals(ns, 0.0);
    SolveResult out;
    double residual = std::numeric_limits<double>::infinity();
    std::size_t sweep = 0;
    while (residual > tol && sweep < kMaxSweeps) {
        const std::vector<double>& src = (sweep % 2 == 0) ? v : w;
        std::vector<double>& dst = (sweep % 2 == 0) ? w : v;

#pragma omp parallel for schedule(static) if (kParallel)
        for (long long si = 0; si < static_cast<long long>(ns); ++si) {
            const std::size_t s = static_cast<std::size_t>(si);
            const double updated = bellman_backup(model, src, s);
            residuals[s] = std::abs(updated - src[s]);
            dst[s] = updated;
        }
        residual = *std::max_element(residuals.begin(), residuals.end());
        ++sweep;
    }
    out.value = (sweep % 2 == 0) ? v : w;
    out.iterations = sweep;
    out.residual = residual;
    return out;
}

// Enumerates the product support of the successor distribution of
// (state, action); used to assemble dense P_pi rows.
void for_each_successor(const JointModel& model, std::span<const int> local,
                        std::span<const int> action,
                        const std::function<void(std::size_t, double)>& fn) {
    std::vector<std::pair<std::size_t, double>> frontier = {{0, 1.0}};
    for (int i = 0; i < model.agent_count(); ++i) {
        std::vector<std::pair<std::size_t, double>> next;
        const auto& row = model.agents()[i].transition[local[i]][action[i]];
        const std::size_t stride = model.strides()[i];
        for (const auto& [idx, p] : frontier)
            for (int nxt = 0; nxt < static_cast<int>(row.size()); ++nxt)
                if (row[nxt] > 0.0)
                    next.emplace_back(idx + static_cast<std::size_t>(nxt) * stride, p * row[nxt]);
        frontier = std::move(next);
    }
    for (const auto& [idx, p] : frontier) fn(idx, p);
}

} // namespace

double expected_joint_value(const JointModel& model, std::span<const double> value,
                            std::span<const int> local, std::span<const int> action) {
    return expected_next_value(model, value, local, action, 0, 0);
}

double bellman_backup(const JointModel& model, std::span<const double> value, std::size_t state,
                      int* best) {
    std::array<int, kMaxAgents> buf;
    const std::span<int> local(buf.data(), static_cast<std::size_t>(model.agent_count()));
    model.decode_into(state, local);

    double best_q = -std::numeric_limits<double>::infinity();
    int best_slot = -1;
    const auto& actions = model.feasible_actions();
    for (int slot = 0; slot < static_cast<int>(actions.size()); ++slot) {
        const double q = q_value(model, value, local, actions[slot]);
        if (q > best_q) {
            best_q = q;
            best_slot = slot;
        }
    }
    if (best) *best = best_slot;
    return best_q;
}

SolveResult value_iterate(const JointModel& model, double tol) {
    return run_value_iteration<true>(model, tol);
}

SolveResult value_iterate_serial(const JointModel& model, double tol) {
    return run_value_iteration<false>(model, tol);
}

Policy extract_policy(const JointModel& model, std::span<const double> value) {
    const std::size_t ns = model.joint_state_count();
    if (value.size() != ns) throw std::invalid_argument("extract_policy: value size mismatch");
    Policy policy(ns, 0);
#pragma omp parallel for schedule(static)
    for (long long si = 0; si < static_cast<long long>(ns); ++si) {
        int slot = 0;
        bellman_backup(model, value, static_cast<std::size_t>(si), &slot);
        policy[static_cast<std::size_t>(si)] = slot;
    }
    return policy;
}

std::vector<double> evaluate_policy(const JointModel& model, const Policy& policy,
                                    std::span<const double> agent_weights) {
    if (policy.size() != model.joint_state_count())
        throw std::invalid_argument("evaluate_policy: policy size mismatch");
    if (static_cast<int>(agent_weights.size()) != model.agent_count())
        throw std::invalid_argument("evaluate_policy: one weight per agent required");

    const std::size_t ns = model.joint_state_count();
    const double gamma = model.discount();

    std::vector<double> reward(ns, 0.0);
    std::vector<int> local(model.agent_count());
    for (std::size_t s = 0; s < ns; ++s) {
        model.decode_into(s, local);
        const auto& action = model.feasible_actions()[policy[s]];
        double r = 0.0;
        for (int i = 0; i < model.agent_count(); ++i)
            r += agent_weights[i] * model.agent_reward(local, action, i);
        reward[s] = r;
    }

    if (ns <= kDenseCutoff) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(static_cast<long>(ns), static_cast<long>(ns));
        for (std::size_t s = 0; s < ns; ++s) {
            model.decode_into(s, local);
            const auto& action = model.feasible_actions()[policy[s]];
            for_each_successor(model, local, action, [&](std::size_t idx, double p) {
                A(static_cast<long>(s), static_cast<long>(idx)) -= gamma * p;
            });
        }
        Eigen::VectorXd b(static_cast<long>(ns));
        for (std::size_t s = 0; s < ns; ++s) b(static_cast<long>(s)) = reward[s];
        const Eigen::VectorXd x = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(b);
        return std::vector<double>(x.data(), x.data() + x.size());
    }

    // iterative fallback; residual tol chosen so the value error stays
    // below ~1e-11 after the gamma/(1-gamma) amplification
    const double tol = 1e-11 * (1.0 - gamma) / std::max(gamma, 0.5);
    std::vector<double> v(ns, 0.0), w(ns, 0.0), residuals(ns, 0.0);
    double residual = std::numeric_limits<double>::infinity();
    std::size_t sweep = 0;
    while (residual > tol && sweep < kMaxSweeps) {
        const std::vector<double>& src = (sweep % 2 == 0) ? v : w;
        std::vector<double>& dst = (sweep % 2 == 0) ? w : v;
#pragma omp parallel for schedule(static)
        for (long long si = 0; si < static_cast<long long>(ns); ++si) {
            const std::size_t s = static_cast<std::size_t>(si);
            std::array<int, kMaxAgents> buf;
            const std::span<int> loc(buf.data(), static_cast<std::size_t>(model.agent_count()));
            model.decode_into(s, loc);
            const auto& action = model.feasible_actions()[policy[s]];
            const double updated =
                reward[s] + gamma * expected_next_value(model, src, loc, action, 0, 0);
            residuals[s] = std::abs(updated - src[s]);
            dst[s] = updated;
        }
        residual = *std::max_element(residuals.begin(), residuals.end());
        ++sweep;
    }
    return (sweep % 2 == 0) ? v : w;
}

double evaluate_policy_subset(const JointModel& model, const Policy& policy, int exclude,
                              const JointState& s0) {
    if (exclude < 0 || exclude >= model.agent_count())
        throw std::invalid_argument("evaluate_policy_subset: invalid agent id");
    std::vector<double> weights(model.agent_count(), 1.0);
    weights[exclude] = 0.0;
    const auto v = evaluate_policy(model, policy, weights);
    return v[model.encode(s0)];
}

std::vector<double> evaluate_policy_agent(const JointModel& model, const Policy& policy, int agent) {
    if (agent < 0 || agent >= model.agent_count())
        throw std::invalid_argument("evaluate_policy_agent: invalid agent id");
    std::vector<double> weights(model.agent_count(), 0.0);
    weights[agent] = 1.0;
    return evaluate_policy(model, policy, weights);
}

} // namespace coordmech
