#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace coordmech {

/// Mixes one 64-bit word into a seed (splitmix64 finalizer).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and a label path,
/// e.g. (master, TAG_TRAJECTORY, excluded_agent, replica). Adding streams
/// with fresh labels never perturbs existing ones.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> labels) {
    std::uint64_t h = mix64(master);
    for (std::uint64_t w : labels)
        h = mix64(h ^ mix64(w));
    return h;
}

// Stream labels used across the harness.
namespace stream {
inline constexpr std::uint64_t world = 1;       // real execution transitions
inline constexpr std::uint64_t trajectory = 2;  // simulated sample paths
inline constexpr std::uint64_t strategy = 3;    // randomized misreports
inline constexpr std::uint64_t replica = 4;     // per-replica episode seeds
inline constexpr std::uint64_t instance = 5;    // random test instances
} // namespace stream

/// Seeded random stream with platform-independent helpers. The mt19937_64
/// engine and the explicit double construction below are bit-reproducible
/// across compilers, unlike std::uniform_real_distribution.
class RngStream {
public:
    RngStream() : engine_(0) {}
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    std::uint64_t bits() { return engine_(); }

    /// Samples an index from a probability vector by inverse CDF, consuming
    /// exactly one uniform regardless of the outcome.
    int categorical(std::span<const double> probs) {
        const double u = uniform01();
        double acc = 0.0;
        const int n = static_cast<int>(probs.size());
        for (int i = 0; i < n; ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        // guard against accumulated rounding just below 1
        for (int i = n - 1; i >= 0; --i)
            if (probs[i] > 0.0) return i;
        throw std::invalid_argument("categorical: empty or zero distribution");
    }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

} // namespace coordmech
