#pragma once

#include <cstdint>
#include <cmath>

namespace sblr {

/// splitmix64 output function; used to expand seeds and derive substreams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Substream derivation rule: stream `key` of master seed `seed` is the
/// generator seeded with splitmix64(seed XOR (key+1)*GOLDEN). Keys are
/// arbitrary 64-bit values; nested splits compose by reapplying the rule.
/// Stream 0 is distinct from the master stream, so the master seed can be
/// used directly without colliding with any substream.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t key) {
    return splitmix64(seed ^ ((key + 1) * 0x9E3779B97F4A7C15ULL));
}

/// xoshiro256++ with splitmix64 state expansion. Seed-deterministic across
/// platforms; all floating-point draws are derived from the integer stream
/// with fixed arithmetic, so identical seeds give identical sequences.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t x = seed;
        for (auto& w : state_) {
            x += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            w = z ^ (z >> 31);
        }
    }

    /// Substream constructor, applying the documented derivation rule.
    Rng(std::uint64_t seed, std::uint64_t key) : Rng(substream_seed(seed, key)) {}

    std::uint64_t next_u64() {
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

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + uniform() * (hi - lo);
    }

    /// Uniform integer in {lo, ..., hi} inclusive.
    int uniform_int(int lo, int hi) {
        const int span = hi - lo + 1;
        int k = static_cast<int>(uniform() * span);
        if (k >= span) k = span - 1;
        return lo + k;
    }

    bool bernoulli(double p) {
        return uniform() < p;
    }

    /// Standard normal via Box-Muller; consumes exactly two uniforms per draw.
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

}  // namespace sblr
