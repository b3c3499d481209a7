#ifndef CSA_RNG_HPP
#define CSA_RNG_HPP

// Seed derivation for reproducible parallel simulation: every frame
// gets its own stream from (master seed, point index, frame index),
// so results do not depend on worker scheduling.

#include <cstdint>

namespace csa {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = master;
    std::uint64_t h = splitmix64(s);
    s ^= a * 0xA24BAED4963EE407ULL;
    h ^= splitmix64(s);
    s ^= b * 0x9FB21C651E98DF25ULL;
    h ^= splitmix64(s);
    return h;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t h = 0xCBF29CE484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace csa

#endif
