#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coordmech/model.hpp"

namespace coordmech {

/// Optimal value function over joint states, plus convergence diagnostics.
struct SolveResult {
    std::vector<double> value;   // indexed by encoded joint state
    std::size_t iterations = 0;
    double residual = 0.0;       // sup-norm Bellman residual at return
};

/// Greedy policy: feasible-action slot (index into feasible_actions()) per
/// joint state.
using Policy = std::vector<int>;

/// One-state Bellman backup: max over feasible actions of the q-value under
/// `value`. Returns the maximizing feasible-action slot through `best` when
/// non-null; ties resolve to the lexicographically smallest joint action.
double bellman_backup(const JointModel& model, std::span<const double> value, std::size_t state,
                      int* best = nullptr);

/// E[value(successor)] of one (local states, joint action) pair under the
/// product kernel.
double expected_joint_value(const JointModel& model, std::span<const double> value,
                            std::span<const int> local, std::span<const int> action);

/// Value iteration (Jacobi sweeps, OpenMP across states) to sup-norm
/// residual <= tol. The result is within tol*gamma/(1-gamma) of V*.
SolveResult value_iterate(const JointModel& model, double tol = 1e-10);

/// Serial reference of the same Jacobi recursion; bit-identical output,
/// kept for testing and benchmark comparison.
SolveResult value_iterate_serial(const JointModel& model, double tol = 1e-10);

/// Greedy feasible action per joint state; ties broken by the global
/// joint-action ordering.
Policy extract_policy(const JointModel& model, std::span<const double> value);

/// Exact fixed-policy evaluation of the weighted reward sum_i w_i r_i:
/// solves (I - gamma P_pi) v = r_pi directly for desk-scale state spaces
/// and falls back to damped Jacobi iterations beyond the dense cutoff.
std::vector<double> evaluate_policy(const JointModel& model, const Policy& policy,
                                    std::span<const double> agent_weights);

/// V*_{-exclude}(s0): discounted reward of all agents except `exclude`
/// under `policy`, from s0, computed exactly (no sampling).
double evaluate_policy_subset(const JointModel& model, const Policy& policy, int exclude,
                              const JointState& s0);

/// Discounted reward of a single agent under `policy`, from every state.
std::vector<double> evaluate_policy_agent(const JointModel& model, const Policy& policy, int agent);

} // namespace coordmech
