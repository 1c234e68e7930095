#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coordmech/model.hpp"
#include "coordmech/scenario.hpp"

using namespace coordmech;

namespace {

AgentModel one_state_agent() {
    AgentModel a;
    a.id = 0;
    a.states = {"s"};
    a.actions = {"null"};
    a.null_action = 0;
    a.transition = {{{1.0}}};
    a.reward = {{0.0}};
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

} // namespace

TEST_CASE("degenerate product: one agent, one state, one action") {
    auto m = build_joint({one_state_agent()}, Feasibility{Feasibility::Kind::all, {}}, 0.5);
    CHECK(m.joint_state_count() == 1);
    CHECK(m.feasible_actions().size() == 1);
}

TEST_CASE("fig1 joint space is the 3x3 product") {
    const Scenario sc = make_fig1_scenario();
    CHECK(sc.model.joint_state_count() == 9);
    CHECK(sc.model.feasible_actions().size() == 4);
}

TEST_CASE("single-activation feasibility yields n+1 joint actions") {
    std::vector<AgentModel> agents;
    for (int i = 0; i < 3; ++i) agents.push_back(constant_chain(i, 1.0 + i).to_agent_model());
    auto m = build_joint(std::move(agents),
                         Feasibility{Feasibility::Kind::single_activation, {}}, 0.9);
    CHECK(m.feasible_actions().size() == 4);
}

TEST_CASE("build_joint rejects bad inputs") {
    CHECK_THROWS_AS(build_joint({}, Feasibility{}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(build_joint({one_state_agent()}, Feasibility{}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_joint({one_state_agent()}, Feasibility{}, 0.0), std::invalid_argument);

    AgentModel bad = one_state_agent();
    bad.transition = {{{0.5}}}; // row does not sum to 1
    CHECK_THROWS_AS(build_joint({bad}, Feasibility{}, 0.5), std::invalid_argument);

    AgentModel negative = one_state_agent();
    negative.reward = {{-1.0}};
    CHECK_THROWS_AS(build_joint({negative}, Feasibility{}, 0.5), std::invalid_argument);

    // all-null must stay feasible
    AgentModel two = one_state_agent();
    two.actions = {"act", "null"};
    two.null_action = 1;
    two.transition = {{{1.0}, {1.0}}};
    two.reward = {{1.0, 0.0}};
    Feasibility only_act;
    only_act.kind = Feasibility::Kind::explicit_list;
    only_act.allowed = {{0}};
    CHECK_THROWS_AS(build_joint({two}, only_act, 0.5), std::invalid_argument);
}

TEST_CASE("encode/decode round-trips the joint index") {
    const Scenario sc = make_fig1_scenario();
    for (std::size_t idx = 0; idx < sc.model.joint_state_count(); ++idx) {
        const JointState s = sc.model.decode(idx);
        CHECK(sc.model.encode(s) == idx);
    }
}

TEST_CASE("step: deterministic chain has a unique successor") {
    MarkovChainModel c;
    c.id = 0;
    c.states = {"a", "b"};
    c.reward = {1.0, 0.0};
    c.transition = {{0.0, 1.0}, {0.0, 1.0}};
    auto m = build_joint({c.to_agent_model()}, Feasibility{Feasibility::Kind::single_activation, {}},
                         0.5);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        RngStream rng(seed);
        auto [next, rewards] = step(m, {0}, std::vector<int>{0}, rng);
        CHECK(next == JointState{1});
        CHECK(rewards[0] == 1.0);
    }
}

TEST_CASE("step: fig1 act branch frequencies are 0.5 +- 0.01") {
    const Scenario sc = make_fig1_scenario();
    const std::vector<int> act = {0, 0};
    RngStream rng(42);
    int to_c = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        auto [next, rewards] = step(sc.model, {0, 0}, act, rng);
        CHECK(rewards[0] == 0.5);
        CHECK(rewards[1] == 0.4);
        REQUIRE((next[0] == 1 || next[0] == 2));
        if (next[0] == 1) ++to_c;
    }
    const double freq = static_cast<double>(to_c) / draws;
    CHECK(freq == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("step: all-null freezes a chain world with zero rewards") {
    std::vector<AgentModel> agents = {constant_chain(0, 1.0).to_agent_model(),
                                      constant_chain(1, 2.0).to_agent_model()};
    auto m =
        build_joint(std::move(agents), Feasibility{Feasibility::Kind::single_activation, {}}, 0.9);
    RngStream rng(7);
    auto [next, rewards] = step(m, {0, 0}, std::vector<int>{1, 1}, rng);
    CHECK(next == JointState{0, 0});
    CHECK(rewards == std::vector<double>{0.0, 0.0});
}

TEST_CASE("step rejects infeasible joint actions") {
    std::vector<AgentModel> agents = {constant_chain(0, 1.0).to_agent_model(),
                                      constant_chain(1, 2.0).to_agent_model()};
    auto m =
        build_joint(std::move(agents), Feasibility{Feasibility::Kind::single_activation, {}}, 0.9);
    RngStream rng(7);
    CHECK_THROWS_AS(step(m, {0, 0}, std::vector<int>{0, 0}, rng), std::invalid_argument);
}

TEST_CASE("step is bit-identical for identical stream state") {
    const Scenario sc = make_fig1_scenario();
    const std::vector<int> act = {0, 0};
    RngStream a(99), b(99);
    for (int i = 0; i < 100; ++i) {
        auto ra = step(sc.model, {0, 0}, act, a);
        auto rb = step(sc.model, {0, 0}, act, b);
        CHECK(ra.first == rb.first);
        CHECK(ra.second == rb.second);
    }
}

TEST_CASE("chain view round-trips and rejects non-chain agents") {
    MarkovChainModel c;
    c.id = 3;
    c.states = {"x", "y"};
    c.reward = {0.25, 0.75};
    c.transition = {{0.5, 0.5}, {0.0, 1.0}};
    const AgentModel a = c.to_agent_model();
    const MarkovChainModel back = MarkovChainModel::from_agent_model(a);
    CHECK(back.reward == c.reward);
    CHECK(back.transition == c.transition);

    AgentModel drifting_null = a;
    drifting_null.transition[0][1] = {0.5, 0.5};
    CHECK_THROWS_AS(MarkovChainModel::from_agent_model(drifting_null), std::invalid_argument);
}
