#pragma once

// Seed derivation and the per-stream generator.
//
// Every random stream in the library (one per face timeline, one per
// replication, one per auxiliary sampler) is a Xoshiro256** generator whose
// state is expanded from a 64-bit stream key with SplitMix64.  Stream keys are
// derived from the master seed by hashing, never by drawing from a shared
// generator, so results do not depend on iteration order or thread schedule.

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace dmsc {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Mixes `value` into `key`; not commutative, so the order of mixed values matters.
inline constexpr std::uint64_t mix_key(std::uint64_t key, std::uint64_t value) noexcept {
    return splitmix64(key ^ splitmix64(value + 0x632BE59BD9B4E019ULL));
}

/// Stream key for a labelled object (e.g. a face: tag = dimension, values = vertices).
template <typename T>
constexpr std::uint64_t derive_stream_key(std::uint64_t master, std::uint64_t tag,
                                          std::span<const T> values) noexcept {
    std::uint64_t key = mix_key(splitmix64(master), tag);
    for (const auto& v : values) key = mix_key(key, static_cast<std::uint64_t>(v));
    return mix_key(key, values.size());
}

inline constexpr std::uint64_t derive_stream_key(std::uint64_t master, std::uint64_t tag) noexcept {
    return mix_key(splitmix64(master), tag);
}

/// Xoshiro256** (Blackman & Vigna); satisfies UniformRandomBitGenerator.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit constexpr Rng(std::uint64_t key = 0) noexcept { seed(key); }

    constexpr void seed(std::uint64_t key) noexcept {
        std::uint64_t x = key;
        for (auto& s : state_) {
            x += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            s = z ^ (z >> 31);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1).
    constexpr double uniform_open() noexcept {
        return (static_cast<double>((*this)() >> 12) + 0.5) * 0x1.0p-52;
    }

    constexpr bool bernoulli(double p) noexcept { return uniform() < p; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

} // namespace dmsc
