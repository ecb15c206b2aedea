#pragma once

#include <cstdint>
#include <random>

namespace phonring {

// splitmix64 output function.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

// Substream seed for (master_seed, stream_index): position stream_index + 1 of
// the splitmix64 sequence started at master_seed. Streams can be created in
// any order, so parallel consumers stay reproducible.
inline std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t stream_index) {
    return mix64(master_seed + (stream_index + 1) * 0x9E3779B97F4A7C15ull);
}

inline std::mt19937_64 substream_rng(std::uint64_t master_seed, std::uint64_t stream_index) {
    return std::mt19937_64(substream_seed(master_seed, stream_index));
}

}  // namespace phonring
