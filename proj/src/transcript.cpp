#include "coordmech/transcript.hpp"

#include <ostream>

namespace coordmech {

namespace {

void write_doubles(std::ostream& out, const std::vector<double>& xs, char sep = '|') {
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out << sep;
        out << xs[i];
    }
}

void write_ints(std::ostream& out, const std::vector<int>& xs, char sep = '|') {
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out << sep;
        out << xs[i];
    }
}

} // namespace

void write_transcript_csv(const Transcript& transcript, std::ostream& out) {
    const auto old_precision = out.precision(17);
    out << "t,true_state,reports,action,activated,outcome,rewards,transfers,charges,"
           "frontier_requests,sim_rewards\n";
    for (const auto& p : transcript.periods) {
        out << p.t << ',';
        if (!p.info_counts.empty()) {
            for (std::size_t i = 0; i < p.info_counts.size(); ++i) {
                if (i) out << '|';
                out << p.info_counts[i].first << ':' << p.info_counts[i].second;
            }
        } else {
            write_ints(out, p.true_state);
        }
        out << ',';
        write_ints(out, p.reports);
        out << ',';
        write_ints(out, p.action);
        out << ',' << p.activated << ',' << p.outcome << ',';
        write_doubles(out, p.rewards);
        out << ',';
        write_doubles(out, p.transfers);
        out << ',';
        write_doubles(out, p.charges);
        out << ',' << p.frontier_requests << ',';
        write_doubles(out, p.sim_rewards);
        out << '\n';
    }
    out.precision(old_precision);
}

std::vector<std::vector<double>> charge_streams(const Transcript& transcript) {
    std::vector<std::vector<double>> streams;
    for (const auto& p : transcript.periods) {
        if (streams.empty()) streams.resize(p.charges.size());
        for (std::size_t i = 0; i < p.charges.size(); ++i) streams[i].push_back(p.charges[i]);
    }
    return streams;
}

} // namespace coordmech
