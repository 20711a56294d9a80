#pragma once

#include <cmath>
#include <cstdint>

namespace postsel {

/// splitmix64 finalizer. Used both for seed expansion and for deriving
/// per-replication substreams.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic substream seed for replication `rep` of a run seeded with
/// `master_seed`:
///
///   substream(master, rep) = mix64(mix64(master + (rep + 1) * 0x9e3779b97f4a7c15))
///
/// The scheme makes Monte-Carlo results independent of worker-thread count
/// and execution order.
inline std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t rep) {
    return mix64(mix64(master_seed + (rep + 1) * 0x9e3779b97f4a7c15ULL));
}

/// xoshiro256++ with splitmix64 seed expansion. Self-contained so that
/// streams are bit-reproducible across standard libraries and platforms.
class rng_stream {
public:
    explicit rng_stream(std::uint64_t seed = 1) {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            word = mix64(x);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1), 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as a log() argument.
    double uniform_pos() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    bool bernoulli(double p) { return uniform01() < p; }

    double rademacher() { return (next() & 1u) ? 1.0 : -1.0; }

    /// Standard normal via Box-Muller. One draw per call, no cached spare,
    /// so the mapping from the underlying bit stream is stateless.
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    /// |N(0,1)| rejected above `bound`. For bound >= 10 the loop essentially
    /// never retries.
    double half_normal_truncated(double bound) {
        double z;
        do {
            z = std::fabs(normal());
        } while (z > bound);
        return z;
    }

private:
    static constexpr double two_pi = 6.283185307179586476925286766559;

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

} // namespace postsel
