#pragma once

#include <cstdint>
#include <random>

namespace greenlink {

// Independent random substreams addressed by (seed, index, lane). Every
// sample index gets its own engine, so results do not depend on which thread
// draws which index or in what order.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index, std::uint32_t lane) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      lane};
    return std::mt19937_64(seq);
}

// Uniform on [0, 1) with 53 random bits; portable across standard libraries.
inline double unit_uniform(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// splitmix64 finalizer, used to derive per-pair seeds from the run seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace greenlink
