#include "coordmech/scenario.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace coordmech {

using nlohmann::json;

int Scenario::agent_count() const {
    return kind == Kind::bandit ? static_cast<int>(arms.size()) : model.agent_count();
}

namespace {

AgentModel parse_agent(const json& doc) {
    AgentModel a;
    a.id = doc.at("id").get<int>();
    a.states = doc.at("states").get<std::vector<std::string>>();
    a.actions = doc.at("actions").get<std::vector<std::string>>();

    auto null_it = std::find(a.actions.begin(), a.actions.end(), "null");
    if (null_it == a.actions.end())
        throw std::invalid_argument("agent " + std::to_string(a.id) +
                                    ": actions must include 'null'");
    a.null_action = static_cast<int>(null_it - a.actions.begin());

    const int ns = a.state_count();
    const int na = a.action_count();
    a.transition.assign(ns, std::vector<std::vector<double>>(na, std::vector<double>(ns, 0.0)));
    a.reward.assign(ns, std::vector<double>(na, 0.0));

    const json& tr = doc.at("transition");
    for (int s = 0; s < ns; ++s) {
        if (!tr.contains(a.states[s]))
            throw std::invalid_argument("agent " + std::to_string(a.id) +
                                        ": missing transition rows for state " + a.states[s]);
        const json& per_action = tr.at(a.states[s]);
        for (int act = 0; act < na; ++act) {
            if (!per_action.contains(a.actions[act]))
                throw std::invalid_argument("agent " + std::to_string(a.id) +
                                            ": missing transition row (" + a.states[s] + ", " +
                                            a.actions[act] + ")");
            for (const auto& [next_name, p] : per_action.at(a.actions[act]).items())
                a.transition[s][act][a.state_index(next_name)] = p.get<double>();
        }
    }
    if (doc.contains("reward")) {
        for (const auto& [state_name, per_action] : doc.at("reward").items()) {
            const int s = a.state_index(state_name);
            for (const auto& [action_name, r] : per_action.items())
                a.reward[s][a.action_index(action_name)] = r.get<double>();
        }
    }
    return a;
}

json agent_to_json(const AgentModel& a) {
    json doc;
    doc["id"] = a.id;
    doc["states"] = a.states;
    doc["actions"] = a.actions;
    json tr = json::object();
    json rw = json::object();
    for (int s = 0; s < a.state_count(); ++s) {
        json per_action = json::object();
        for (int act = 0; act < a.action_count(); ++act) {
            json row = json::object();
            for (int nxt = 0; nxt < a.state_count(); ++nxt)
                if (a.transition[s][act][nxt] != 0.0) row[a.states[nxt]] = a.transition[s][act][nxt];
            per_action[a.actions[act]] = row;
            if (a.reward[s][act] != 0.0) rw[a.states[s]][a.actions[act]] = a.reward[s][act];
        }
        tr[a.states[s]] = per_action;
    }
    doc["transition"] = tr;
    if (!rw.empty()) doc["reward"] = rw;
    return doc;
}

Strategy parse_strategy(const json& doc) {
    Strategy st;
    st.agent = doc.at("agent").get<int>();
    const std::string kind = doc.value("kind", "truthful");
    if (kind == "truthful") {
        st.kind = Strategy::Kind::truthful;
    } else if (kind == "fixed_misreport") {
        st.kind = Strategy::Kind::fixed_misreport;
        for (const auto& [from, to] : doc.at("map").items())
            st.state_map[std::stoi(from)] = to.get<int>();
    } else if (kind == "random_misreport") {
        st.kind = Strategy::Kind::random_misreport;
        st.misreport_prob = doc.at("prob").get<double>();
    } else if (kind == "index_manipulation") {
        st.kind = Strategy::Kind::index_manipulation;
        st.table_offset = doc.value("offset", 0.0);
        if (doc.contains("table")) st.table_override.index = doc.at("table").get<std::vector<double>>();
        st.table_override.agent = st.agent;
    } else if (kind == "frontier_misreport") {
        st.kind = Strategy::Kind::frontier_misreport;
        st.frontier_offset = doc.at("offset").get<double>();
    } else if (kind == "wrong_prior") {
        st.kind = Strategy::Kind::wrong_prior;
        st.prior_override = doc.at("prior").get<std::string>();
    } else if (kind == "inconsistent_index") {
        st.kind = Strategy::Kind::inconsistent_index;
        st.index_report_offset = doc.at("offset").get<double>();
    } else {
        throw std::invalid_argument("unknown strategy kind '" + kind + "'");
    }
    return st;
}

json strategy_to_json(const Strategy& st) {
    json doc;
    doc["agent"] = st.agent;
    switch (st.kind) {
    case Strategy::Kind::truthful:
        doc["kind"] = "truthful";
        break;
    case Strategy::Kind::fixed_misreport: {
        doc["kind"] = "fixed_misreport";
        json map = json::object();
        for (const auto& [from, to] : st.state_map) map[std::to_string(from)] = to;
        doc["map"] = map;
        break;
    }
    case Strategy::Kind::random_misreport:
        doc["kind"] = "random_misreport";
        doc["prob"] = st.misreport_prob;
        break;
    case Strategy::Kind::index_manipulation:
        doc["kind"] = "index_manipulation";
        if (st.table_offset != 0.0) doc["offset"] = st.table_offset;
        if (!st.table_override.index.empty()) doc["table"] = st.table_override.index;
        break;
    case Strategy::Kind::frontier_misreport:
        doc["kind"] = "frontier_misreport";
        doc["offset"] = st.frontier_offset;
        break;
    case Strategy::Kind::wrong_prior:
        doc["kind"] = "wrong_prior";
        doc["prior"] = st.prior_override;
        break;
    case Strategy::Kind::inconsistent_index:
        doc["kind"] = "inconsistent_index";
        doc["offset"] = st.index_report_offset;
        break;
    }
    return doc;
}

} // namespace

JointModel parse_model(const json& doc) {
    std::vector<AgentModel> agents;
    for (const auto& a : doc.at("agents")) agents.push_back(parse_agent(a));
    for (std::size_t i = 0; i < agents.size(); ++i)
        if (agents[i].id != static_cast<int>(i))
            throw std::invalid_argument("agents must be listed in id order starting at 0");

    Feasibility feas;
    const json& f = doc.at("feasibility");
    const std::string kind = f.at("kind").get<std::string>();
    if (kind == "all") {
        feas.kind = Feasibility::Kind::all;
    } else if (kind == "single_activation") {
        feas.kind = Feasibility::Kind::single_activation;
    } else if (kind == "explicit") {
        feas.kind = Feasibility::Kind::explicit_list;
        for (const auto& row : f.at("allowed")) {
            std::vector<int> action;
            for (std::size_t i = 0; i < agents.size(); ++i)
                action.push_back(agents[i].action_index(row.at(i).get<std::string>()));
            feas.allowed.push_back(std::move(action));
        }
    } else {
        throw std::invalid_argument("unknown feasibility kind '" + kind + "'");
    }
    return build_joint(std::move(agents), std::move(feas), doc.at("discount").get<double>());
}

json model_to_json(const JointModel& model) {
    json doc;
    json agents = json::array();
    for (const auto& a : model.agents()) agents.push_back(agent_to_json(a));
    doc["agents"] = agents;
    json feas;
    switch (model.feasibility().kind) {
    case Feasibility::Kind::all:
        feas["kind"] = "all";
        break;
    case Feasibility::Kind::single_activation:
        feas["kind"] = "single_activation";
        break;
    case Feasibility::Kind::explicit_list: {
        feas["kind"] = "explicit";
        json allowed = json::array();
        for (const auto& action : model.feasibility().allowed) {
            json row = json::array();
            for (std::size_t i = 0; i < action.size(); ++i)
                row.push_back(model.agents()[i].actions[action[i]]);
            allowed.push_back(row);
        }
        feas["allowed"] = allowed;
        break;
    }
    }
    doc["feasibility"] = feas;
    doc["discount"] = model.discount();
    return doc;
}

Scenario parse_scenario(const json& doc) {
    Scenario sc;
    sc.version = doc.value("version", 1);
    sc.name = doc.value("name", "");
    const std::string kind = doc.value("kind", "mdp");
    if (kind == "mdp")
        sc.kind = Scenario::Kind::mdp;
    else if (kind == "chain")
        sc.kind = Scenario::Kind::chain;
    else if (kind == "bandit")
        sc.kind = Scenario::Kind::bandit;
    else
        throw std::invalid_argument("unknown scenario kind '" + kind + "'");

    if (sc.kind == Scenario::Kind::bandit) {
        for (const auto& arm : doc.at("arms"))
            sc.arms.push_back(BanditArm{arm.at("ground_truth_p").get<double>(),
                                        arm.value("prior_string", std::string())});
        sc.discount = doc.at("discount").get<double>();
        sc.epsilon = doc.value("epsilon", 1e-6);
        sc.r_max = doc.value("r_max", 1.0);
        sc.mechanism = doc.value("mechanism", "learning");
    } else {
        sc.model = parse_model(doc.at("model"));
        sc.discount = sc.model.discount();
        sc.mechanism = doc.value("mechanism", sc.kind == Scenario::Kind::chain ? "sgv" : "vcg");
        const auto& s0 = doc.at("s0");
        for (int i = 0; i < sc.model.agent_count(); ++i)
            sc.s0.push_back(sc.model.agents()[i].state_index(s0.at(i).get<std::string>()));
        if (sc.kind == Scenario::Kind::chain) chains_of(sc); // validate the restriction
    }

    if (doc.contains("strategies"))
        for (const auto& st : doc.at("strategies")) sc.strategies.push_back(parse_strategy(st));
    sc.horizon = doc.value("horizon", 0);
    sc.replicas = doc.value("replicas", 1LL);
    sc.seed = doc.value("seed", std::uint64_t{1});
    sc.m = doc.value("m", 16);
    if (sc.m < 1) throw std::invalid_argument("m must be >= 1");
    for (const auto& st : sc.strategies)
        if (st.agent < 0 || st.agent >= sc.agent_count())
            throw std::invalid_argument("strategy references unknown agent");
    return sc;
}

json scenario_to_json(const Scenario& sc) {
    json doc;
    doc["version"] = sc.version;
    if (!sc.name.empty()) doc["name"] = sc.name;
    doc["kind"] = sc.kind == Scenario::Kind::mdp     ? "mdp"
                  : sc.kind == Scenario::Kind::chain ? "chain"
                                                     : "bandit";
    if (sc.kind == Scenario::Kind::bandit) {
        json arms = json::array();
        for (const auto& arm : sc.arms) {
            json a;
            a["ground_truth_p"] = arm.ground_truth_p;
            a["prior_string"] = arm.prior_string;
            arms.push_back(a);
        }
        doc["arms"] = arms;
        doc["discount"] = sc.discount;
        doc["epsilon"] = sc.epsilon;
        doc["r_max"] = sc.r_max;
    } else {
        doc["model"] = model_to_json(sc.model);
        json s0 = json::array();
        for (int i = 0; i < sc.model.agent_count(); ++i)
            s0.push_back(sc.model.agents()[i].states[sc.s0[i]]);
        doc["s0"] = s0;
    }
    doc["mechanism"] = sc.mechanism;
    if (!sc.strategies.empty()) {
        json strategies = json::array();
        for (const auto& st : sc.strategies) strategies.push_back(strategy_to_json(st));
        doc["strategies"] = strategies;
    }
    doc["horizon"] = sc.horizon;
    doc["replicas"] = sc.replicas;
    doc["seed"] = sc.seed;
    doc["m"] = sc.m;
    return doc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw std::runtime_error("invalid JSON in " + path + ": " + e.what());
    }
    try {
        return parse_scenario(doc);
    } catch (const json::exception& e) {
        throw std::runtime_error("schema error in " + path + ": " + e.what());
    }
}

void save_scenario(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scenario file: " + path);
    out << scenario_to_json(scenario).dump(2) << '\n';
}

std::uint64_t scenario_hash(const Scenario& scenario) {
    const std::string canonical = scenario_to_json(scenario).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<MarkovChainModel> chains_of(const Scenario& scenario) {
    if (scenario.kind != Scenario::Kind::chain)
        throw std::invalid_argument("chains_of: scenario is not a chain world");
    if (scenario.model.feasibility().kind != Feasibility::Kind::single_activation)
        throw std::invalid_argument("chains_of: chain worlds use single_activation feasibility");
    std::vector<MarkovChainModel> chains;
    for (const auto& agent : scenario.model.agents())
        chains.push_back(MarkovChainModel::from_agent_model(agent));
    return chains;
}

namespace {

AgentModel chain_agent(int id, std::vector<std::string> states, std::vector<double> reward,
                       std::vector<std::vector<double>> transition) {
    MarkovChainModel c;
    c.id = id;
    c.states = std::move(states);
    c.reward = std::move(reward);
    c.transition = std::move(transition);
    return c.to_agent_model();
}

} // namespace

Scenario make_fig1_scenario() {
    // Two 3-state agents, both free to act each period. Agent 0 earns 0.5
    // in B then moves to an absorbing state worth 0 (C) or 1 (D) with equal
    // probability; agent 1 sits in an absorbing state worth 0.4. The two
    // extra agent-1 states are unreachable padding.
    AgentModel a0;
    a0.id = 0;
    a0.states = {"B", "C", "D"};
    a0.actions = {"act", "null"};
    a0.null_action = 1;
    a0.transition = {
        {{0.0, 0.5, 0.5}, {1.0, 0.0, 0.0}}, // B: act splits to C/D, null freezes
        {{0.0, 1.0, 0.0}, {0.0, 1.0, 0.0}}, // C absorbing
        {{0.0, 0.0, 1.0}, {0.0, 0.0, 1.0}}, // D absorbing
    };
    a0.reward = {{0.5, 0.0}, {0.0, 0.0}, {1.0, 0.0}};

    AgentModel a1;
    a1.id = 1;
    a1.states = {"E", "F", "G"};
    a1.actions = {"act", "null"};
    a1.null_action = 1;
    a1.transition = {
        {{1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}},
        {{0.0, 1.0, 0.0}, {0.0, 1.0, 0.0}},
        {{0.0, 0.0, 1.0}, {0.0, 0.0, 1.0}},
    };
    a1.reward = {{0.4, 0.0}, {0.0, 0.0}, {0.0, 0.0}};

    Scenario sc;
    sc.name = "fig1";
    sc.kind = Scenario::Kind::mdp;
    sc.model = build_joint({a0, a1}, Feasibility{Feasibility::Kind::all, {}}, 0.9);
    sc.discount = 0.9;
    sc.s0 = {0, 0};
    sc.mechanism = "vcg";
    sc.seed = 20260809;
    return sc;
}

Scenario make_deceptive_pair_scenario() {
    // Chain A pays a flat 0.5; chain B pays 1 once and then is worthless.
    // The greedy-by-reward policy is suboptimal here; the index policy
    // drains B first.
    Scenario sc;
    sc.name = "deceptive_pair";
    sc.kind = Scenario::Kind::chain;
    sc.model = build_joint(
        {
            chain_agent(0, {"a"}, {0.5}, {{1.0}}),
            chain_agent(1, {"s1", "s2"}, {1.0, 0.0}, {{0.0, 1.0}, {0.0, 1.0}}),
        },
        Feasibility{Feasibility::Kind::single_activation, {}}, 0.5);
    sc.discount = 0.5;
    sc.s0 = {0, 0};
    sc.mechanism = "dgv";
    sc.seed = 20260809;
    sc.m = 16;
    return sc;
}

Scenario make_two_arm_bandit_scenario() {
    Scenario sc;
    sc.name = "two_arm_bandit";
    sc.kind = Scenario::Kind::bandit;
    sc.arms = {{0.9, ""}, {0.1, ""}};
    sc.discount = 0.9;
    sc.epsilon = 1e-6;
    sc.r_max = 1.0;
    sc.mechanism = "learning";
    sc.horizon = 200;
    sc.seed = 20260809;
    sc.m = 16;
    return sc;
}

} // namespace coordmech
