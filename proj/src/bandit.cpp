#include "coordmech/bandit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coordmech {

InfoState parse_prior(const std::string& observations, double alpha0, double beta0) {
    InfoState s;
    s.alpha = alpha0;
    s.beta = beta0;
    for (char c : observations) {
        if (c == '1')
            ++s.successes;
        else if (c == '0')
            ++s.failures;
        else
            throw std::invalid_argument("parse_prior: observation strings use only 0/1");
    }
    return s;
}

InfoTransition info_transition(const InfoState& state) {
    InfoTransition t;
    t.p_success = state.success_prob();
    t.success = state;
    t.success.successes += 1;
    t.failure = state;
    t.failure.failures += 1;
    return t;
}

int TruncationPolicy::horizon(double discount) const {
    if (!(epsilon > 0.0) || !(r_max > 0.0))
        throw std::invalid_argument("TruncationPolicy: epsilon and r_max must be positive");
    if (!(discount > 0.0 && discount < 1.0))
        throw std::invalid_argument("TruncationPolicy: discount must lie in (0,1)");
    const double ratio = epsilon * (1.0 - discount) / r_max;
    int h = 1;
    if (ratio < 1.0) h = static_cast<int>(std::ceil(std::log(ratio) / std::log(discount)));
    if (h < 1) h = 1;
    if (h > horizon_cap)
        throw std::invalid_argument("TruncationPolicy: truncation depth exceeds the cap");
    return h;
}

double truncated_index_at_depth(const InfoState& state, double discount, int depth) {
    if (!(discount > 0.0 && discount < 1.0))
        throw std::invalid_argument("truncated_index: discount must lie in (0,1)");
    if (depth < 1) throw std::invalid_argument("truncated_index: depth must be >= 1");

    // g(c) = F(c) - c where F(c) is the root's continue-value when the
    // restart action is pinned to the constant c. Continue moves strictly
    // deeper into the (successes, failures) triangle, so F(c) resolves in
    // one exact backward pass per candidate; g is strictly decreasing
    // (slope <= gamma - 1), so the fixed point c* = F(c*) is a bracketed
    // single root.
    std::vector<double> deeper(static_cast<std::size_t>(depth) + 2, 0.0);
    std::vector<double> next(static_cast<std::size_t>(depth) + 2, 0.0);
    const auto g = [&](double c) {
        std::fill(deeper.begin(), deeper.end(), 0.0); // beyond-depth states valued 0
        for (int d = depth; d >= 1; --d) {
            for (int i = 0; i <= d; ++i) {
                InfoState s = state;
                s.successes += i;
                s.failures += d - i;
                const double p = s.success_prob();
                const double cont =
                    p + discount * (p * deeper[static_cast<std::size_t>(i) + 1] +
                                    (1.0 - p) * deeper[static_cast<std::size_t>(i)]);
                next[static_cast<std::size_t>(i)] = std::max(cont, c);
            }
            std::swap(deeper, next);
        }
        const double p0 = state.success_prob();
        const double cont_root = p0 + discount * (p0 * deeper[1] + (1.0 - p0) * deeper[0]);
        return cont_root - c;
    };

    double a = 0.0;
    double b = 1.0 / (1.0 - discount); // posterior-mean rewards lie in [0,1]
    double ga = g(a);
    double gb = g(b);
    if (ga <= 0.0) return 0.0; // zero-reward root: c* = 0
    if (gb >= 0.0) return (1.0 - discount) * b;

    // Illinois variant of false position: monotone g, guaranteed bracket
    double c = a;
    int held = 0; // which endpoint survived the last update: -1 = a, +1 = b
    for (int it = 0; it < 300 && b - a > 1e-14 * std::max(1.0, b); ++it) {
        double mid = b - gb * (b - a) / (gb - ga);
        if (!(mid > a && mid < b)) mid = 0.5 * (a + b);
        const double gm = g(mid);
        if (gm > 0.0) {
            a = mid;
            ga = gm;
            if (held == 1) gb *= 0.5;
            held = 1;
        } else {
            b = mid;
            gb = gm;
            if (held == -1) ga *= 0.5;
            held = -1;
        }
        c = mid;
        if (std::abs(gm) <= 1e-15) break;
    }
    return (1.0 - discount) * (c + g(c)); // index = (1-gamma) * F(c) with c ~ c*
}

double truncated_index(const InfoState& state, double discount, const TruncationPolicy& trunc) {
    return truncated_index_at_depth(state, discount, trunc.horizon(discount));
}

double IndexCache::get(const InfoState& state) {
    const auto key = std::make_tuple(state.successes, state.failures,
                                     std::bit_cast<std::uint64_t>(state.alpha),
                                     std::bit_cast<std::uint64_t>(state.beta));
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    const double value = truncated_index(state, discount_, trunc_);
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.emplace(key, value).first->second;
}

namespace {

// One simulated marginal-world path over information states.
struct BanditTrajectory {
    int excluded = 0;
    std::vector<InfoState> states;
    std::vector<double> reward_log;
    RngStream rng;
};

struct ResponseKey {
    int agent;
    long long successes;
    long long failures;
    auto operator<=>(const ResponseKey&) const = default;
};

// Per-run cache of frontier responses keyed by (agent, counts); pseudo-
// counts are fixed per agent by its prior report.
using ResponseCache = std::map<ResponseKey, double>;

double frontier_response(const Strategy& strategy, const InfoState& state, IndexCache& truthful) {
    double value = truthful.get(state);
    if (strategy.kind == Strategy::Kind::frontier_misreport) value += strategy.frontier_offset;
    return value;
}

} // namespace

Transcript run_learning_mechanism(const std::vector<BanditArm>& arms,
                                  const std::vector<Strategy>& strategies,
                                  const LearningConfig& config, IndexCache* cache,
                                  PlannerCounters* counters) {
    const int n = static_cast<int>(arms.size());
    if (n < 2) throw std::invalid_argument("run_learning_mechanism: need at least two agents");
    if (config.horizon < 1) throw std::invalid_argument("run_learning_mechanism: horizon >= 1");
    if (config.m < 1) throw std::invalid_argument("run_learning_mechanism: m >= 1");
    if (!strategies.empty() && static_cast<int>(strategies.size()) != n)
        throw std::invalid_argument("run_learning_mechanism: one strategy per agent");

    std::vector<Strategy> strat(strategies.begin(), strategies.end());
    if (strat.empty()) strat.resize(n);

    IndexCache local_cache(config.discount, config.trunc);
    IndexCache& idx = cache ? *cache : local_cache;
    if (cache && (cache->discount() != config.discount))
        throw std::invalid_argument("run_learning_mechanism: cache discount mismatch");

    // reported initial models; a prior override is the consistent-wrong-model probe
    std::vector<InfoState> reported(n), truth(n);
    for (int i = 0; i < n; ++i) {
        truth[i] = parse_prior(arms[i].prior_string);
        reported[i] = strat[i].kind == Strategy::Kind::wrong_prior
                          ? parse_prior(strat[i].prior_override)
                          : truth[i];
    }

    // n sets of m marginal sample paths, all starting from the reported priors
    std::vector<std::vector<BanditTrajectory>> marginal(n);
    for (int i = 0; i < n; ++i) {
        marginal[i].resize(config.m);
        for (int k = 0; k < config.m; ++k) {
            auto& traj = marginal[i][k];
            traj.excluded = i;
            traj.states = reported;
            traj.rng = RngStream(derive_seed(config.seed, {stream::trajectory,
                                                           static_cast<std::uint64_t>(i + 1),
                                                           static_cast<std::uint64_t>(k)}));
        }
    }

    RngStream world(derive_seed(config.seed, {stream::world}));
    ResponseCache responses;

    Transcript transcript;
    transcript.mechanism = "learning";
    transcript.seed = config.seed;
    transcript.discount = config.discount;

    for (int t = 0; t < config.horizon; ++t) {
        PeriodRecord rec;
        rec.t = t;
        rec.frontier_requests = 0;

        // 1. per-period state + index reports on the real path
        std::vector<double> index_reports(n);
        for (int i = 0; i < n; ++i) {
            index_reports[i] = idx.get(reported[i]);
            if (strat[i].kind == Strategy::Kind::inconsistent_index)
                index_reports[i] += strat[i].index_report_offset;
            rec.info_counts.emplace_back(truth[i].successes, truth[i].failures);
        }
        rec.index_reports = index_reports;

        // 2. activate the argmax arm (ties to the lowest id)
        int activated = 0;
        double best = index_reports[0];
        for (int i = 1; i < n; ++i) {
            if (counters) ++counters->index_comparisons;
            if (index_reports[i] > best) {
                best = index_reports[i];
                activated = i;
            }
        }
        if (counters) ++counters->argmax_decisions;
        rec.activated = activated;

        const double reported_reward = reported[activated].success_prob();

        // 3. real pull against the hidden ground truth
        const bool success = world.bernoulli(arms[activated].ground_truth_p);
        rec.outcome = success ? 1 : 0;
        if (success)
            ++truth[activated].successes;
        else
            ++truth[activated].failures;
        if (success)
            ++reported[activated].successes;
        else
            ++reported[activated].failures;

        rec.rewards.assign(n, 0.0);
        rec.rewards[activated] = success ? 1.0 : 0.0;

        // 4. advance all n*m marginal trajectories
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < config.m; ++k) {
                auto& traj = marginal[i][k];
                int pick = -1;
                double pick_index = -std::numeric_limits<double>::infinity();
                for (int j = 0; j < n; ++j) {
                    if (j == i) continue;
                    const ResponseKey key{j, traj.states[j].successes, traj.states[j].failures};
                    auto found = responses.find(key);
                    if (found == responses.end()) {
                        ++rec.frontier_requests;
                        const double value = frontier_response(strat[j], traj.states[j], idx);
                        found = responses.emplace(key, value).first;
                    }
                    if (pick >= 0 && counters) ++counters->index_comparisons;
                    if (found->second > pick_index) {
                        pick_index = found->second;
                        pick = j;
                    }
                }
                if (counters) ++counters->argmax_decisions;
                const double p = traj.states[pick].success_prob();
                traj.reward_log.push_back(p);
                rec.sim_rewards.push_back(p);
                if (traj.rng.bernoulli(p))
                    ++traj.states[pick].successes;
                else
                    ++traj.states[pick].failures;
            }
        }

        // 5. marginal-simulation transfers
        rec.transfers.assign(n, 0.0);
        rec.charges.assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
            double avg = 0.0;
            for (int k = 0; k < config.m; ++k) avg += marginal[i][k].reward_log.back();
            avg /= static_cast<double>(config.m);
            rec.charges[i] = avg;
            rec.transfers[i] = (i == activated ? 0.0 : reported_reward) - avg;
        }

        for (int i = 0; i < n; ++i) rec.reports.push_back(static_cast<int>(reported[i].successes));
        transcript.periods.push_back(std::move(rec));
    }
    return transcript;
}

std::vector<int> centralized_gittins_decisions(const std::vector<BanditArm>& arms,
                                               const LearningConfig& config, IndexCache* cache) {
    const int n = static_cast<int>(arms.size());
    if (n < 1) throw std::invalid_argument("centralized_gittins_decisions: need at least one arm");

    IndexCache local_cache(config.discount, config.trunc);
    IndexCache& idx = cache ? *cache : local_cache;

    std::vector<InfoState> states(n);
    for (int i = 0; i < n; ++i) states[i] = parse_prior(arms[i].prior_string);

    RngStream world(derive_seed(config.seed, {stream::world}));
    std::vector<int> decisions;
    decisions.reserve(config.horizon);
    for (int t = 0; t < config.horizon; ++t) {
        int pick = 0;
        double best = idx.get(states[0]);
        for (int i = 1; i < n; ++i) {
            const double gi = idx.get(states[i]);
            if (gi > best) {
                best = gi;
                pick = i;
            }
        }
        decisions.push_back(pick);
        if (world.bernoulli(arms[pick].ground_truth_p))
            ++states[pick].successes;
        else
            ++states[pick].failures;
    }
    return decisions;
}

} // namespace coordmech
