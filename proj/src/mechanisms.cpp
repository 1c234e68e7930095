#include "coordmech/mechanisms.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coordmech {

TransferVector groves_transfers(const JointModel& model, const JointState& reports,
                                std::span<const int> action) {
    const int n = model.agent_count();
    std::vector<double> period(n);
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        period[j] = model.agent_reward(reports, action, j);
        total += period[j];
    }
    TransferVector t(n);
    for (int i = 0; i < n; ++i) t[i] = total - period[i];
    return t;
}

ChargeSchedule precompute_vcg_charges(const JointModel& model, const Policy& policy,
                                      const JointState& s0) {
    const int n = model.agent_count();
    ChargeSchedule cs;
    cs.charge.resize(n);
    for (int i = 0; i < n; ++i)
        cs.charge[i] = (1.0 - model.discount()) * evaluate_policy_subset(model, policy, i, s0);
    return cs;
}

TransferVector vcg_transfers(const JointModel& model, const JointState& reports,
                             std::span<const int> action, const ChargeSchedule& charges) {
    TransferVector t = groves_transfers(model, reports, action);
    if (charges.charge.size() != t.size())
        throw std::invalid_argument("vcg_transfers: charge schedule arity mismatch");
    for (std::size_t i = 0; i < t.size(); ++i) t[i] -= charges.charge[i];
    return t;
}

namespace {

// Period payoff of the deviator when the true joint state is `truth`, its
// report is `report` (others truthful) and the planner plays
// pi*(reported joint). The constant VCG charge is omitted: it shifts every
// reporting policy's value identically and cancels in the gap.
struct DeviatorWorld {
    const JointModel& model;
    const Policy& planner_policy;
    int deviator;
    DeviationOptions options;
    // self_reported_charge only: V_{-i} under pi*, per joint state
    std::vector<double> subset_value;

    double payoff(const JointState& truth, int report, std::span<const int>& action_out,
                  JointState& scratch_reported) const {
        scratch_reported = truth;
        scratch_reported[deviator] = report;
        const std::size_t reported_idx = model.encode(scratch_reported);
        const auto& action = model.feasible_actions()[planner_policy[reported_idx]];
        action_out = action;

        double pay = model.agent_reward(truth, action, deviator);
        if (!options.withhold_payments) {
            for (int j = 0; j < model.agent_count(); ++j)
                if (j != deviator) pay += model.agent_reward(truth, action, j);
        }
        if (options.self_reported_charge)
            pay -= (1.0 - model.discount()) * subset_value[reported_idx];
        return pay;
    }
};

// Value iteration over the deviator's decision MDP.
std::vector<double> solve_deviator(const DeviatorWorld& world, std::vector<int>* policy_out) {
    const JointModel& model = world.model;
    const std::size_t ns = model.joint_state_count();
    const int reports = model.agents()[world.deviator].state_count();

    std::vector<double> v(ns, 0.0), w(ns, 0.0);
    double residual = std::numeric_limits<double>::infinity();
    std::vector<int> best(ns, 0);
    JointState truth(model.agent_count()), scratch(model.agent_count());
    while (residual > world.options.tol) {
        residual = 0.0;
        for (std::size_t s = 0; s < ns; ++s) {
            model.decode_into(s, truth);
            double best_q = -std::numeric_limits<double>::infinity();
            int best_report = 0;
            for (int rep = 0; rep < reports; ++rep) {
                std::span<const int> action;
                const double pay = world.payoff(truth, rep, action, scratch);
                const double q =
                    pay + model.discount() * expected_joint_value(model, v, truth, action);
                if (q > best_q) {
                    best_q = q;
                    best_report = rep;
                }
            }
            w[s] = best_q;
            best[s] = best_report;
        }
        for (std::size_t s = 0; s < ns; ++s)
            residual = std::max(residual, std::abs(w[s] - v[s]));
        v.swap(w);
    }
    if (policy_out) *policy_out = std::move(best);
    return v;
}

// Exact evaluation of the truthful reporting policy in the same world.
std::vector<double> evaluate_truthful(const DeviatorWorld& world) {
    const JointModel& model = world.model;
    const std::size_t ns = model.joint_state_count();
    JointState truth(model.agent_count()), scratch(model.agent_count());

    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(static_cast<long>(ns), static_cast<long>(ns));
    Eigen::VectorXd b(static_cast<long>(ns));
    std::vector<double> probe(ns, 0.0);
    for (std::size_t s = 0; s < ns; ++s) {
        model.decode_into(s, truth);
        std::span<const int> action;
        b(static_cast<long>(s)) = world.payoff(truth, truth[world.deviator], action, scratch);
        // row of gamma * P: walk the product support of the successor kernel
        std::vector<std::pair<std::size_t, double>> frontier = {{0, 1.0}};
        for (int i = 0; i < model.agent_count(); ++i) {
            std::vector<std::pair<std::size_t, double>> next;
            const auto& row = model.agents()[i].transition[truth[i]][action[i]];
            const std::size_t stride = model.strides()[i];
            for (const auto& [idx, p] : frontier)
                for (int nxt = 0; nxt < static_cast<int>(row.size()); ++nxt)
                    if (row[nxt] > 0.0)
                        next.emplace_back(idx + static_cast<std::size_t>(nxt) * stride,
                                          p * row[nxt]);
            frontier = std::move(next);
        }
        for (const auto& [idx, p] : frontier)
            A(static_cast<long>(s), static_cast<long>(idx)) -= model.discount() * p;
    }
    const Eigen::VectorXd x = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(b);
    return std::vector<double>(x.data(), x.data() + x.size());
}

} // namespace

BestResponse best_response_value(const JointModel& model, MechanismKind mechanism, int deviator,
                                 const DeviationOptions& options) {
    if (deviator < 0 || deviator >= model.agent_count())
        throw std::invalid_argument("best_response_value: invalid deviator id");

    const SolveResult vi = value_iterate(model, options.tol);
    const Policy planner = extract_policy(model, vi.value);

    DeviatorWorld world{model, planner, deviator, options, {}};
    (void)mechanism; // the constant VCG charge cancels in the gap
    if (options.self_reported_charge) {
        std::vector<double> weights(model.agent_count(), 1.0);
        weights[deviator] = 0.0;
        world.subset_value = evaluate_policy(model, planner, weights);
    }

    BestResponse out;
    out.deviation_value = solve_deviator(world, &out.report_policy);
    out.truthful_value = evaluate_truthful(world);
    out.max_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < model.joint_state_count(); ++s)
        out.max_gap = std::max(out.max_gap, out.deviation_value[s] - out.truthful_value[s]);
    return out;
}

} // namespace coordmech
