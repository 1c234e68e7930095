#include "coordmech/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coordmech/stats.hpp"

namespace coordmech {

namespace {

enum class MechanismId { groves, vcg, sgv, dgv, learning, groves_withheld, vcg_selfcharge };

MechanismId mechanism_id(const std::string& name) {
    if (name == "groves") return MechanismId::groves;
    if (name == "vcg") return MechanismId::vcg;
    if (name == "sgv") return MechanismId::sgv;
    if (name == "dgv") return MechanismId::dgv;
    if (name == "learning") return MechanismId::learning;
    if (name == "groves-withheld") return MechanismId::groves_withheld;
    if (name == "vcg-selfcharge") return MechanismId::vcg_selfcharge;
    throw std::invalid_argument("unknown mechanism '" + name + "'");
}

bool is_mdp_mechanism(MechanismId id) {
    return id == MechanismId::groves || id == MechanismId::vcg ||
           id == MechanismId::groves_withheld || id == MechanismId::vcg_selfcharge;
}

std::vector<Strategy> resolve_strategies(std::span<const Strategy> strategies, int n) {
    std::vector<Strategy> out(n);
    for (int i = 0; i < n; ++i) out[i].agent = i;
    for (const auto& st : strategies) {
        if (st.agent < 0 || st.agent >= n)
            throw std::invalid_argument("strategy/agent count mismatch");
        out[st.agent] = st;
    }
    return out;
}

std::map<int, GittinsTable> table_overrides(std::span<const Strategy> strategies,
                                            std::span<const GittinsTable> truth) {
    std::map<int, GittinsTable> overrides;
    for (const auto& st : strategies) {
        if (st.kind != Strategy::Kind::index_manipulation) continue;
        GittinsTable t = truth[st.agent];
        if (!st.table_override.index.empty()) {
            t.index = st.table_override.index;
        } else {
            for (double& g : t.index) g += st.table_offset;
        }
        overrides[st.agent] = std::move(t);
    }
    return overrides;
}

Transcript run_mdp_episode(const Scenario& scenario, const SolvedScenario& solved,
                           std::span<const Strategy> strategies, int horizon, std::uint64_t seed,
                           MechanismId mech) {
    const JointModel& model = scenario.model;
    const int n = model.agent_count();
    const double gamma = model.discount();

    RngStream world(derive_seed(seed, {stream::world}));
    std::vector<RngStream> strat_rng;
    for (int i = 0; i < n; ++i)
        strat_rng.emplace_back(derive_seed(seed, {stream::strategy, static_cast<std::uint64_t>(i)}));

    Transcript tr;
    tr.mechanism = scenario.mechanism;
    tr.seed = seed;
    tr.scenario_hash = scenario_hash(scenario);
    tr.discount = gamma;

    JointState state = scenario.s0;
    JointState reports(n);
    for (int t = 0; t < horizon; ++t) {
        PeriodRecord rec;
        rec.t = t;
        rec.true_state = state;
        for (int i = 0; i < n; ++i) {
            reports[i] = strategies[i].report_state(state[i], model.agents()[i].state_count(),
                                                    strat_rng[i]);
            if (reports[i] < 0 || reports[i] >= model.agents()[i].state_count())
                throw std::invalid_argument("report outside the agent's state set");
        }
        rec.reports = reports;

        const std::size_t reported_idx = model.encode(reports);
        const auto& action = model.feasible_actions()[solved.policy[reported_idx]];
        rec.action = action;

        rec.rewards.resize(n);
        for (int i = 0; i < n; ++i) rec.rewards[i] = model.agent_reward(state, action, i);

        rec.charges.assign(n, 0.0);
        switch (mech) {
        case MechanismId::groves:
            rec.transfers = groves_transfers(model, reports, action);
            break;
        case MechanismId::vcg:
            rec.transfers = vcg_transfers(model, reports, action, solved.charges);
            rec.charges = solved.charges.charge;
            break;
        case MechanismId::groves_withheld:
            rec.transfers.assign(n, 0.0);
            break;
        case MechanismId::vcg_selfcharge: {
            // broken on purpose: the charge tracks the current reported
            // state, so an agent's own report moves its own charge
            rec.transfers = groves_transfers(model, reports, action);
            for (int i = 0; i < n; ++i) {
                const double c = (1.0 - gamma) * solved.subset_value[i][reported_idx];
                rec.transfers[i] -= c;
                rec.charges[i] = c;
            }
            break;
        }
        default:
            throw std::invalid_argument("mechanism/world mismatch");
        }

        auto [next, rewards_true] = step(model, state, action, world);
        (void)rewards_true;
        state = std::move(next);
        tr.periods.push_back(std::move(rec));
    }
    return tr;
}

Transcript run_chain_episode(const Scenario& scenario, const SolvedScenario& solved,
                             std::span<const Strategy> strategies, int horizon, std::uint64_t seed,
                             MechanismId mech, PlannerCounters* counters) {
    const auto& chains = solved.chains;
    const int n = static_cast<int>(chains.size());

    const auto overrides = table_overrides(strategies, solved.tables);
    const std::vector<GittinsTable> reported = reported_tables(solved.tables, overrides);

    std::vector<SampleTrajectory> star;
    std::vector<std::vector<SampleTrajectory>> marginal;
    if (mech == MechanismId::sgv) {
        for (int k = 0; k < scenario.m; ++k)
            star.push_back(make_trajectory(chains, scenario.s0, -1, k, seed));
    } else {
        marginal.resize(n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < scenario.m; ++k)
                marginal[i].push_back(make_trajectory(chains, scenario.s0, i, k, seed));
    }

    RngStream world(derive_seed(seed, {stream::world}));
    std::vector<RngStream> strat_rng;
    for (int i = 0; i < n; ++i)
        strat_rng.emplace_back(derive_seed(seed, {stream::strategy, static_cast<std::uint64_t>(i)}));

    Transcript tr;
    tr.mechanism = scenario.mechanism;
    tr.seed = seed;
    tr.scenario_hash = scenario_hash(scenario);
    tr.discount = scenario.discount;

    JointState state = scenario.s0;
    std::vector<int> reports(n);
    for (int t = 0; t < horizon; ++t) {
        PeriodRecord rec;
        rec.t = t;
        rec.true_state = state;
        for (int i = 0; i < n; ++i)
            reports[i] =
                strategies[i].report_state(state[i], chains[i].state_count(), strat_rng[i]);
        rec.reports = reports;

        const int activated = index_policy(reported, reports, counters);
        rec.activated = activated;
        const double reported_reward = chains[activated].reward[reports[activated]];

        if (mech == MechanismId::sgv) {
            advance_samples(star, chains, reported, counters);
            rec.transfers = sgv_transfers(activated, reported_reward, star,
                                          static_cast<std::size_t>(t), n, &rec.charges);
            for (const auto& traj : star) rec.sim_rewards.push_back(traj.reward_log.back());
        } else {
            for (auto& set : marginal) advance_samples(set, chains, reported, counters);
            rec.transfers = dgv_transfers(activated, reported_reward, marginal,
                                          static_cast<std::size_t>(t), &rec.charges);
            for (const auto& set : marginal)
                for (const auto& traj : set) rec.sim_rewards.push_back(traj.reward_log.back());
        }

        rec.rewards.assign(n, 0.0);
        rec.rewards[activated] = chains[activated].reward[state[activated]];

        state[activated] = world.categorical(chains[activated].transition[state[activated]]);
        tr.periods.push_back(std::move(rec));
    }
    return tr;
}

} // namespace

SolvedScenario solve_scenario(const Scenario& scenario) {
    SolvedScenario solved;
    switch (scenario.kind) {
    case Scenario::Kind::mdp: {
        solved.vi = value_iterate(scenario.model);
        solved.policy = extract_policy(scenario.model, solved.vi.value);
        const int n = scenario.model.agent_count();
        solved.subset_value.resize(n);
        std::vector<double> weights(n, 1.0);
        for (int i = 0; i < n; ++i) {
            weights[i] = 0.0;
            solved.subset_value[i] = evaluate_policy(scenario.model, solved.policy, weights);
            weights[i] = 1.0;
        }
        solved.charges.charge.resize(n);
        const std::size_t s0 = scenario.model.encode(scenario.s0);
        for (int i = 0; i < n; ++i)
            solved.charges.charge[i] =
                (1.0 - scenario.discount) * solved.subset_value[i][s0];
        break;
    }
    case Scenario::Kind::chain: {
        solved.chains = chains_of(scenario);
        for (const auto& chain : solved.chains)
            solved.tables.push_back(gittins_table(chain, scenario.discount));
        break;
    }
    case Scenario::Kind::bandit:
        solved.index_cache =
            std::make_shared<IndexCache>(scenario.discount, scenario.truncation());
        break;
    }
    return solved;
}

int default_horizon(double discount) {
    if (!(discount > 0.0 && discount < 1.0))
        throw std::invalid_argument("default_horizon: discount must lie in (0,1)");
    return static_cast<int>(std::ceil(std::log(1e-8) / std::log(discount)));
}

int effective_horizon(const Scenario& scenario) {
    return scenario.horizon > 0 ? scenario.horizon : default_horizon(scenario.discount);
}

Transcript run_episode(const Scenario& scenario, const SolvedScenario& solved,
                       std::span<const Strategy> strategies, int horizon, std::uint64_t seed,
                       PlannerCounters* counters) {
    if (horizon < 1) throw std::invalid_argument("run_episode: horizon must be >= 1");
    const MechanismId mech = mechanism_id(scenario.mechanism);
    const auto resolved = resolve_strategies(strategies, scenario.agent_count());

    if (scenario.kind == Scenario::Kind::bandit) {
        if (mech != MechanismId::learning)
            throw std::invalid_argument("bandit worlds run the learning mechanism");
        LearningConfig config;
        config.discount = scenario.discount;
        config.trunc = scenario.truncation();
        config.m = scenario.m;
        config.horizon = horizon;
        config.seed = seed;
        Transcript tr = run_learning_mechanism(scenario.arms, resolved, config,
                                               solved.index_cache.get(), counters);
        tr.scenario_hash = scenario_hash(scenario);
        return tr;
    }
    if (scenario.kind == Scenario::Kind::chain) {
        if (mech != MechanismId::sgv && mech != MechanismId::dgv)
            throw std::invalid_argument("chain worlds run sgv or dgv");
        return run_chain_episode(scenario, solved, resolved, horizon, seed, mech, counters);
    }
    if (!is_mdp_mechanism(mech))
        throw std::invalid_argument("general MDP worlds run groves or vcg");
    return run_mdp_episode(scenario, solved, resolved, horizon, seed, mech);
}

EpisodeMetrics summarize_episode(const Transcript& tr) {
    EpisodeMetrics m;
    if (tr.periods.empty()) return m;
    const int n = static_cast<int>(tr.periods.front().rewards.size());
    const double gamma = tr.discount;

    std::vector<KahanSum> reward(n), transfer(n);
    KahanSum world_reward;
    m.agent_ir_violations.assign(n, 0);
    m.period_payoff.assign(n, {});

    double factor = 1.0;
    for (const auto& p : tr.periods) {
        for (int i = 0; i < n; ++i) {
            reward[i].add(factor * p.rewards[i]);
            transfer[i].add(factor * p.transfers[i]);
            const double period_payoff = p.rewards[i] + p.transfers[i];
            m.period_payoff[i].push_back(period_payoff);
            if (period_payoff < -1e-9) ++m.agent_ir_violations[i];
            world_reward.add(factor * p.rewards[i]);
        }
        factor *= gamma;
    }

    m.agent_reward.resize(n);
    m.agent_transfer.resize(n);
    m.agent_payoff.resize(n);
    KahanSum welfare, net;
    for (int i = 0; i < n; ++i) {
        m.agent_reward[i] = reward[i].value();
        m.agent_transfer[i] = transfer[i].value();
        m.agent_payoff[i] = m.agent_reward[i] + m.agent_transfer[i];
        welfare.add(m.agent_reward[i]);
        net.add(m.agent_transfer[i]);
    }
    m.welfare = welfare.value();
    m.net_transfer = net.value();
    m.net_transfer_with_world = m.net_transfer + world_reward.value();
    return m;
}

MetricReport estimate(const Scenario& scenario, const SolvedScenario& solved,
                      std::span<const Strategy> strategies, int horizon, long long replicas,
                      std::uint64_t master_seed,
                      const std::function<double(const Transcript&)>& metric) {
    if (replicas < 2) throw std::invalid_argument("estimate: replicas must be >= 2");
    std::vector<double> values(static_cast<std::size_t>(replicas));
#pragma omp parallel for schedule(dynamic, 16)
    for (long long r = 0; r < replicas; ++r) {
        const std::uint64_t seed =
            derive_seed(master_seed, {stream::replica, static_cast<std::uint64_t>(r)});
        const Transcript tr = run_episode(scenario, solved, strategies, horizon, seed);
        values[static_cast<std::size_t>(r)] = metric(tr);
    }
    const SampleSummary s = summarize_sample(values);
    return MetricReport{s.mean, s.stderr_, s.ci_low, s.ci_high, replicas};
}

MetricReport deviation_gain(const Scenario& scenario, const SolvedScenario& solved,
                            const Strategy& deviation, int horizon, long long replicas,
                            std::uint64_t master_seed) {
    if (replicas < 2) throw std::invalid_argument("deviation_gain: replicas must be >= 2");
    const int n = scenario.agent_count();
    const auto truthful = truthful_profile(n);
    std::vector<Strategy> deviating = truthful;
    deviating[deviation.agent] = deviation;

    std::vector<double> diffs(static_cast<std::size_t>(replicas));
#pragma omp parallel for schedule(dynamic, 16)
    for (long long r = 0; r < replicas; ++r) {
        const std::uint64_t seed =
            derive_seed(master_seed, {stream::replica, static_cast<std::uint64_t>(r)});
        const Transcript base = run_episode(scenario, solved, truthful, horizon, seed);
        const Transcript dev = run_episode(scenario, solved, deviating, horizon, seed);
        const EpisodeMetrics mb = summarize_episode(base);
        const EpisodeMetrics md = summarize_episode(dev);
        diffs[static_cast<std::size_t>(r)] =
            md.agent_payoff[deviation.agent] - mb.agent_payoff[deviation.agent];
    }
    const SampleSummary s = summarize_sample(diffs);
    return MetricReport{s.mean, s.stderr_, s.ci_low, s.ci_high, replicas};
}

std::vector<Strategy> truthful_profile(int agent_count) {
    std::vector<Strategy> out(static_cast<std::size_t>(agent_count));
    for (int i = 0; i < agent_count; ++i) out[static_cast<std::size_t>(i)].agent = i;
    return out;
}

} // namespace coordmech
