#pragma once

#include <map>
#include <string>

#include "coordmech/gittins.hpp"
#include "coordmech/rng.hpp"

namespace coordmech {

/// One agent's reporting behavior. The truthful strategy always reports the
/// true local state; the other kinds are deviation probes for the
/// verification harness. The three bandit-only kinds cover misreporting the
/// model (consistently), the per-period index (inconsistently with the
/// reported state), and the frontier responses on other agents' sample
/// paths.
struct Strategy {
    enum class Kind {
        truthful,
        fixed_misreport,    // report state_map[true] where mapped
        random_misreport,   // with misreport_prob, report a uniform other state
        index_manipulation, // chain worlds: override the reported index table
        frontier_misreport, // bandit: offset frontier index responses
        wrong_prior,        // bandit: misreport the prior, stay self-consistent
        inconsistent_index, // bandit: shift own per-period index reports
    };

    Kind kind = Kind::truthful;
    int agent = 0;
    std::map<int, int> state_map;
    double misreport_prob = 0.0;
    GittinsTable table_override; // empty: shift the true table by table_offset
    double table_offset = 0.0;
    double frontier_offset = 0.0;
    double index_report_offset = 0.0;
    std::string prior_override;

    /// Reported local state. Consumes exactly two uniforms for the random
    /// kind and none otherwise, so paired replays stay aligned.
    int report_state(int true_state, int state_count, RngStream& rng) const {
        switch (kind) {
        case Kind::fixed_misreport: {
            auto it = state_map.find(true_state);
            return it == state_map.end() ? true_state : it->second;
        }
        case Kind::random_misreport: {
            const bool deviate = rng.uniform01() < misreport_prob;
            const double u = rng.uniform01();
            if (!deviate || state_count < 2) return true_state;
            int other = static_cast<int>(u * (state_count - 1));
            if (other >= state_count - 1) other = state_count - 2;
            return other >= true_state ? other + 1 : other;
        }
        default:
            return true_state;
        }
    }
};

} // namespace coordmech
