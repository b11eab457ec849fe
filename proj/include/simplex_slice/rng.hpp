#pragma once

#include <cstdint>
#include <random>

namespace sslice {

/// Derives the engine seed of stream `stream_id` from a user seed. Two
/// rounds of SplitMix64 decorrelate neighbouring (seed, stream) pairs, so
/// parallel chains seeded as (seed, 0), (seed, 1), ... are independent.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream_id) noexcept;

/// Per-stream random source. Not shareable across threads; give each
/// thread its own (seed, stream) pair instead.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : engine_(stream_seed(seed, stream_id)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in the open interval (0, 1), 53 random bits.
    double uniform_open() {
        for (;;) {
            const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) {
        std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
        return dist(engine_);
    }

    double normal() { return normal_(engine_); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace sslice
