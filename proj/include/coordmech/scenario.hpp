#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "coordmech/bandit.hpp"
#include "coordmech/model.hpp"
#include "coordmech/strategy.hpp"

namespace coordmech {

/// A runnable experiment: a world (general joint MDP, Markov-chain world,
/// or bandit world), a mechanism, strategy assignments and run controls.
/// The exact JSON schema is documented in the README; parsing round-trips.
struct Scenario {
    enum class Kind { mdp, chain, bandit };

    int version = 1;
    std::string name;
    Kind kind = Kind::mdp;

    // mdp / chain worlds
    JointModel model;
    JointState s0;

    // bandit worlds
    std::vector<BanditArm> arms;
    double discount = 0.9; // mirrors model.discount() for mdp/chain
    double epsilon = 1e-6;
    double r_max = 1.0;

    // run controls
    std::string mechanism = "vcg";
    std::vector<Strategy> strategies; // empty = all truthful
    int horizon = 0;                  // 0 = auto from the discount tail bound
    long long replicas = 1;
    std::uint64_t seed = 1;
    int m = 16;

    int agent_count() const;
    TruncationPolicy truncation() const { return TruncationPolicy{epsilon, r_max, 10000}; }
};

JointModel parse_model(const nlohmann::json& doc);
nlohmann::json model_to_json(const JointModel& model);

Scenario parse_scenario(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& scenario);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

/// FNV-1a over the canonical serialized form.
std::uint64_t scenario_hash(const Scenario& scenario);

/// Chain view of every agent in a chain-world scenario; throws if any agent
/// is not a valid Markov chain restriction.
std::vector<MarkovChainModel> chains_of(const Scenario& scenario);

/// In-repo fixtures.
Scenario make_fig1_scenario();
Scenario make_deceptive_pair_scenario();
Scenario make_two_arm_bandit_scenario();

} // namespace coordmech
