#pragma once

#include <cstdint>
#include <random>

namespace lmc {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Independent stream for (master seed, path index, stream tag).
inline Rng make_stream(std::uint64_t master, std::uint64_t index, std::uint64_t tag) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s ^= index * 0xd1b54a32d192ed03ULL;
    std::uint64_t b = splitmix64(s);
    s ^= tag * 0x8cb92ba72f3d8dd7ULL;
    std::uint64_t c = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
    return Rng(seq);
}

inline double uniform01(Rng& rng) {
    // (0,1): never returns an endpoint.
    constexpr double scale = 1.0 / 9007199254740992.0;
    return (static_cast<double>(rng() >> 11) + 0.5) * scale;
}

enum StreamTag : std::uint64_t { kJumpStream = 1, kThinningStream = 2, kAuxStream = 3 };

}  // namespace lmc
