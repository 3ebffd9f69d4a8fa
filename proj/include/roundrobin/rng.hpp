#pragma once

#include <array>
#include <cstdint>

namespace roundrobin {

namespace detail {

// splitmix64 finalizer (Steele/Lea/Flood); also used as a seed scrambler.
inline constexpr std::uint64_t split_mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Deterministic 64-bit stream addressed by (master seed, stream index).
///
/// The state is a pure function of the pair, so stream index can be used as
/// a replication index: distinct indices give streams that are independent
/// for simulation purposes, and reruns are reproducible regardless of how
/// replications are scheduled across workers.
///
/// Output sequence is xoshiro256++ (Blackman & Vigna, public domain), state
/// filled from two splitmix64 scrambles of seed and index.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index) noexcept {
        const std::uint64_t a = detail::split_mix(master_seed);
        const std::uint64_t b = detail::split_mix(stream_index ^ 0x1d872b41b0c88fbdULL);
        std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
        for (auto& s : state_) s = detail::split_mix(z += 0x9e3779b97f4a7c15ULL);
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::array<std::uint64_t, 4> state_;
};

}  // namespace roundrobin
