#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coordmech/model.hpp"
#include "coordmech/scenario.hpp"
#include "coordmech/solver.hpp"

using namespace coordmech;

namespace {

AgentModel unit_reward_agent() {
    AgentModel a;
    a.id = 0;
    a.states = {"s"};
    a.actions = {"act", "null"};
    a.null_action = 1;
    a.transition = {{{1.0}, {1.0}}};
    a.reward = {{1.0, 0.0}};
    return a;
}

MarkovChainModel constant_chain(int id, double reward) {
    MarkovChainModel c;
    c.id = id;
    c.states = {"s"};
    c.reward = {reward};
    c.transition = {{1.0}};
    return c;
}

double bellman_residual(const JointModel& m, const std::vector<double>& v) {
    double r = 0.0;
    for (std::size_t s = 0; s < m.joint_state_count(); ++s)
        r = std::max(r, std::abs(bellman_backup(m, v, s) - v[s]));
    return r;
}

} // namespace

TEST_CASE("geometric series: reward 1 per period at gamma = 0.5") {
    auto m = build_joint({unit_reward_agent()}, Feasibility{Feasibility::Kind::all, {}}, 0.5);
    const SolveResult vi = value_iterate(m, 1e-12);
    CHECK(vi.value[0] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("fig1 optimal values at gamma = 0.9") {
    const Scenario sc = make_fig1_scenario();
    const SolveResult vi = value_iterate(sc.model, 1e-12);
    const std::size_t be = sc.model.encode(JointState{0, 0}); // {B,E}
    const std::size_t ce = sc.model.encode(JointState{1, 0}); // {C,E}
    CHECK(vi.value[be] == doctest::Approx(9.0).epsilon(1e-9));
    CHECK(vi.value[ce] == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("returned value satisfies the Bellman residual contract") {
    const Scenario sc = make_fig1_scenario();
    const double tol = 1e-8;
    const SolveResult vi = value_iterate(sc.model, tol);
    CHECK(vi.residual <= tol);
    CHECK(bellman_residual(sc.model, vi.value) <= tol);
}

TEST_CASE("parallel and serial value iteration agree bit-exactly") {
    const Scenario sc = make_fig1_scenario();
    const SolveResult a = value_iterate(sc.model, 1e-10);
    const SolveResult b = value_iterate_serial(sc.model, 1e-10);
    REQUIRE(a.value.size() == b.value.size());
    CHECK(a.iterations == b.iterations);
    for (std::size_t s = 0; s < a.value.size(); ++s) CHECK(a.value[s] == b.value[s]);
}

TEST_CASE("extract_policy: single feasible action everywhere") {
    AgentModel a = unit_reward_agent();
    a.actions = {"null"};
    a.null_action = 0;
    a.transition = {{{1.0}}};
    a.reward = {{0.5}};
    auto m = build_joint({a}, Feasibility{Feasibility::Kind::all, {}}, 0.5);
    const SolveResult vi = value_iterate(m);
    const Policy p = extract_policy(m, vi.value);
    CHECK(p[0] == 0);
}

TEST_CASE("extract_policy: dominant constant chain wins everywhere") {
    std::vector<AgentModel> agents = {constant_chain(0, 1.0).to_agent_model(),
                                      constant_chain(1, 2.0).to_agent_model()};
    auto m =
        build_joint(std::move(agents), Feasibility{Feasibility::Kind::single_activation, {}}, 0.9);
    const SolveResult vi = value_iterate(m);
    const Policy p = extract_policy(m, vi.value);
    const auto& action = m.feasible_actions()[p[0]];
    CHECK(action[0] == 1); // chain 0 frozen
    CHECK(action[1] == 0); // chain 1 activated
}

TEST_CASE("extract_policy: fig1 plays the all-act action in {B,E}") {
    const Scenario sc = make_fig1_scenario();
    const SolveResult vi = value_iterate(sc.model, 1e-12);
    const Policy p = extract_policy(sc.model, vi.value);
    const auto& action = sc.model.feasible_actions()[p[sc.model.encode(JointState{0, 0})]];
    CHECK(action == std::vector<int>{0, 0});
}

TEST_CASE("greedy policy value stays within the contraction bound of V") {
    const Scenario sc = make_fig1_scenario();
    const double tol = 1e-6;
    const double gamma = sc.model.discount();
    const SolveResult vi = value_iterate(sc.model, tol);
    const Policy p = extract_policy(sc.model, vi.value);
    std::vector<double> weights(sc.model.agent_count(), 1.0);
    const auto v_pi = evaluate_policy(sc.model, p, weights);
    const double bound = tol * (1.0 + gamma) / (1.0 - gamma);
    for (std::size_t s = 0; s < v_pi.size(); ++s)
        CHECK(std::abs(v_pi[s] - vi.value[s]) <= bound);
}

TEST_CASE("reward scaling scales values and preserves the argmax") {
    const Scenario sc = make_fig1_scenario();
    const double c = 3.25;
    Scenario scaled = sc;
    std::vector<AgentModel> agents = sc.model.agents();
    for (auto& a : agents)
        for (auto& per_state : a.reward)
            for (double& r : per_state) r *= c;
    scaled.model = build_joint(std::move(agents), sc.model.feasibility(), sc.model.discount());

    const SolveResult base = value_iterate(sc.model, 1e-12);
    const SolveResult big = value_iterate(scaled.model, 1e-12 * c);
    const Policy pa = extract_policy(sc.model, base.value);
    const Policy pb = extract_policy(scaled.model, big.value);
    for (std::size_t s = 0; s < base.value.size(); ++s) {
        CHECK(big.value[s] == doctest::Approx(c * base.value[s]).epsilon(1e-9));
        CHECK(pa[s] == pb[s]);
    }
}

TEST_CASE("fig1 subset evaluation reproduces the published arithmetic") {
    const Scenario sc = make_fig1_scenario();
    const SolveResult vi = value_iterate(sc.model, 1e-12);
    const Policy p = extract_policy(sc.model, vi.value);
    const JointState s0 = {0, 0};
    // exclude agent 1: agent 0's expected flow is 0.5 per period
    CHECK(evaluate_policy_subset(sc.model, p, 1, s0) == doctest::Approx(5.0).epsilon(1e-10));
    // exclude agent 0: agent 1 earns a flat 0.4
    CHECK(evaluate_policy_subset(sc.model, p, 0, s0) == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("excluding the only agent yields zero") {
    auto m = build_joint({unit_reward_agent()}, Feasibility{Feasibility::Kind::all, {}}, 0.5);
    const SolveResult vi = value_iterate(m);
    const Policy p = extract_policy(m, vi.value);
    CHECK(evaluate_policy_subset(m, p, 0, {0}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(evaluate_policy_subset(m, p, 2, {0}), std::invalid_argument);
}

TEST_CASE("subset value plus own value equals the full policy value") {
    const Scenario sc = make_fig1_scenario();
    const SolveResult vi = value_iterate(sc.model, 1e-12);
    const Policy p = extract_policy(sc.model, vi.value);
    std::vector<double> ones(sc.model.agent_count(), 1.0);
    const auto full = evaluate_policy(sc.model, p, ones);
    for (int i = 0; i < sc.model.agent_count(); ++i) {
        const auto own = evaluate_policy_agent(sc.model, p, i);
        std::vector<double> w(sc.model.agent_count(), 1.0);
        w[i] = 0.0;
        const auto rest = evaluate_policy(sc.model, p, w);
        for (std::size_t s = 0; s < full.size(); ++s)
            CHECK(own[s] + rest[s] == doctest::Approx(full[s]).epsilon(1e-9));
    }
}
