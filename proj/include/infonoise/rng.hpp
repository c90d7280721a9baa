#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace infonoise {

// Named substreams so every component draws from its own deterministic
// stream derived from the single run seed.
enum class StreamId : std::uint64_t {
    profile_mc = 1,
    scheduler = 2,
    train = 3,
    sample = 4,
    init = 5,
};

// splitmix64 finalizer; good enough to decorrelate seed/stream pairs.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64(stream + 0x51ED270B7A1FCA1Dull));
}

inline std::uint64_t derive_seed(std::uint64_t seed, StreamId stream) {
    return derive_seed(seed, static_cast<std::uint64_t>(stream));
}

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(derive_seed(seed, stream));
}

inline std::mt19937_64 substream(std::uint64_t seed, StreamId stream) {
    return substream(seed, static_cast<std::uint64_t>(stream));
}

// Uniform double in [0, 1), 53 mantissa bits.
inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller (cosine branch). Two raw draws per value,
// which keeps the stream layout independent of any library implementation.
inline double normal01(std::mt19937_64& g) {
    const double u1 = 1.0 - uniform01(g);  // (0, 1]
    const double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace infonoise
