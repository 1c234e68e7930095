#include "coordmech/gittins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coordmech {

namespace {
constexpr std::size_t kMaxSweeps = 20000000;
} // namespace

double gittins_index(const MarkovChainModel& chain, int target, double discount, double tol) {
    chain.validate();
    if (target < 0 || target >= chain.state_count())
        throw std::invalid_argument("gittins_index: target state out of range");
    if (!(tol > 0.0)) throw std::invalid_argument("gittins_index: tol must be positive");
    if (!(discount > 0.0 && discount < 1.0))
        throw std::invalid_argument("gittins_index: discount must lie in (0,1)");

    const int k = chain.state_count();
    std::vector<double> v(k, 0.0), w(k, 0.0);
    double residual = std::numeric_limits<double>::infinity();
    std::size_t sweep = 0;
    while (residual > tol && sweep < kMaxSweeps) {
        // value of restarting: activate the target once, then continue
        double restart = chain.reward[target];
        for (int nxt = 0; nxt < k; ++nxt)
            restart += discount * chain.transition[target][nxt] * v[nxt];
        residual = 0.0;
        for (int s = 0; s < k; ++s) {
            double cont = chain.reward[s];
            for (int nxt = 0; nxt < k; ++nxt)
                cont += discount * chain.transition[s][nxt] * v[nxt];
            w[s] = std::max(cont, restart);
            residual = std::max(residual, std::abs(w[s] - v[s]));
        }
        v.swap(w);
        ++sweep;
    }
    return (1.0 - discount) * v[target];
}

namespace {

template <bool kParallel>
GittinsTable table_impl(const MarkovChainModel& chain, double discount, double tol) {
    GittinsTable table;
    table.agent = chain.id;
    table.index.assign(chain.state_count(), 0.0);
#pragma omp parallel for schedule(static) if (kParallel)
    for (int s = 0; s < chain.state_count(); ++s)
        table.index[s] = gittins_index(chain, s, discount, tol);
    return table;
}

} // namespace

GittinsTable gittins_table(const MarkovChainModel& chain, double discount, double tol) {
    return table_impl<true>(chain, discount, tol);
}

GittinsTable gittins_table_serial(const MarkovChainModel& chain, double discount, double tol) {
    return table_impl<false>(chain, discount, tol);
}

int argmax_index(std::span<const GittinsTable> tables, std::span<const int> states,
                 std::span<const char> eligible, PlannerCounters* counters) {
    if (tables.size() != states.size() || tables.size() != eligible.size())
        throw std::invalid_argument("argmax_index: arity mismatch");
    int best = -1;
    double best_index = -std::numeric_limits<double>::infinity();
    long long comparisons = 0;
    for (std::size_t i = 0; i < tables.size(); ++i) {
        if (!eligible[i]) continue;
        const auto& table = tables[i];
        if (states[i] < 0 || states[i] >= static_cast<int>(table.index.size()))
            throw std::invalid_argument("argmax_index: state outside table range");
        const double gi = table.index[states[i]];
        if (best >= 0) ++comparisons;
        if (gi > best_index) {
            best_index = gi;
            best = static_cast<int>(i);
        }
    }
    if (best < 0) throw std::invalid_argument("argmax_index: no eligible agent");
    if (counters) {
        counters->index_comparisons += comparisons;
        counters->argmax_decisions += 1;
    }
    return best;
}

int index_policy(std::span<const GittinsTable> tables, std::span<const int> states,
                 PlannerCounters* counters) {
    std::vector<char> all(tables.size(), 1);
    return argmax_index(tables, states, all, counters);
}

SampleTrajectory make_trajectory(std::span<const MarkovChainModel> chains,
                                 std::span<const int> s0, int excluded, int replica,
                                 std::uint64_t master_seed) {
    SampleTrajectory t;
    t.excluded = excluded;
    t.replica = replica;
    t.states.assign(s0.begin(), s0.end());
    if (t.states.size() != chains.size())
        throw std::invalid_argument("make_trajectory: initial state arity mismatch");
    t.rng = RngStream(derive_seed(master_seed, {stream::trajectory,
                                                static_cast<std::uint64_t>(excluded + 1),
                                                static_cast<std::uint64_t>(replica)}));
    return t;
}

void advance_samples(std::span<SampleTrajectory> trajectories,
                     std::span<const MarkovChainModel> chains,
                     std::span<const GittinsTable> reported, PlannerCounters* counters) {
    const int n = static_cast<int>(chains.size());
    for (auto& traj : trajectories) {
        std::vector<char> eligible(n, 1);
        if (traj.excluded >= 0) {
            if (traj.excluded >= n)
                throw std::invalid_argument("advance_samples: excluded agent out of range");
            eligible[traj.excluded] = 0;
        }
        if (traj.excluded >= 0 && n == 1) {
            // empty marginal world: no activation, zero system reward
            traj.reward_log.push_back(0.0);
            continue;
        }
        const int pick = argmax_index(reported, traj.states, eligible, counters);
        traj.reward_log.push_back(chains[pick].reward[traj.states[pick]]);
        traj.states[pick] = traj.rng.categorical(chains[pick].transition[traj.states[pick]]);
    }
}

namespace {

double sample_average_at(std::span<const SampleTrajectory> samples, std::size_t t) {
    if (samples.empty()) throw std::invalid_argument("transfers: need m >= 1 sample trajectories");
    double acc = 0.0;
    for (const auto& traj : samples) {
        if (t >= traj.reward_log.size())
            throw std::invalid_argument("transfers: trajectories not advanced through t");
        acc += traj.reward_log[t];
    }
    return acc / static_cast<double>(samples.size());
}

} // namespace

TransferVector sgv_transfers(int activated, double reported_reward,
                             std::span<const SampleTrajectory> star_samples, std::size_t t,
                             int agent_count, std::vector<double>* charges_out) {
    const double avg = sample_average_at(star_samples, t);
    TransferVector out(agent_count);
    if (charges_out) charges_out->assign(agent_count, avg);
    for (int i = 0; i < agent_count; ++i)
        out[i] = (i == activated ? 0.0 : reported_reward) - avg;
    return out;
}

TransferVector dgv_transfers(int activated, double reported_reward,
                             std::span<const std::vector<SampleTrajectory>> marginal_sets,
                             std::size_t t, std::vector<double>* charges_out) {
    const int n = static_cast<int>(marginal_sets.size());
    TransferVector out(n);
    if (charges_out) charges_out->assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (const auto& traj : marginal_sets[i])
            if (traj.excluded != i)
                throw std::invalid_argument("dgv_transfers: trajectory set/agent mismatch");
        const double avg = sample_average_at(marginal_sets[i], t);
        if (charges_out) (*charges_out)[i] = avg;
        out[i] = (i == activated ? 0.0 : reported_reward) - avg;
    }
    return out;
}

std::vector<GittinsTable> reported_tables(std::span<const GittinsTable> truth,
                                          const std::map<int, GittinsTable>& overrides) {
    std::vector<GittinsTable> out(truth.begin(), truth.end());
    for (const auto& [agent, table] : overrides) {
        if (agent < 0 || agent >= static_cast<int>(out.size()))
            throw std::invalid_argument("reported_tables: override for unknown agent");
        if (table.index.size() != out[agent].index.size())
            throw std::invalid_argument("reported_tables: override table has wrong state count");
        out[agent].index = table.index;
    }
    return out;
}

} // namespace coordmech
