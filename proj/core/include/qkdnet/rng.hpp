#pragma once

#include <cstdint>
#include <string_view>

namespace qkdnet {

/// Deterministic random stream (xoshiro256**), seeded through SplitMix64.
/// Integer-only state transitions, so sequences are identical across
/// platforms and build modes.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double();

    /// Uniform integer in [0, n). n must be > 0. Unbiased (rejection sampling).
    std::uint64_t next_below(std::uint64_t n);

private:
    std::uint64_t state_[4];
};

/// Derives an independent stream for one session from the scenario master
/// seed and the session identifier. Identical inputs give identical streams;
/// distinct ids give statistically independent streams.
RngStream derive_stream(std::uint64_t master_seed, std::string_view session_id);

} // namespace qkdnet
