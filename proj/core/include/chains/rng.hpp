#pragma once

#include <cstdint>

// Counter-based randomness: every consumer owns a SubStream keyed by
// (master seed, stream id). Streams are pure functions of their key, so
// replicas can run in any order (or on any worker) and reproduce exactly.

namespace chains::rng {

// splitmix64 finalizer; also used as the key-mixing hash
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// substream derivation: documented as mix64(mix64(seed) ^ mix64(id))
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t id) {
    return mix64(mix64(seed) ^ mix64(id ^ 0x5851f42d4c957f2dull));
}

// maps signed time indices to distinct stream ids (zigzag)
constexpr std::uint64_t time_id(long long t) {
    const auto u = static_cast<std::uint64_t>(t);
    return (u << 1) ^ static_cast<std::uint64_t>(t >> 63);
}

class SubStream {
public:
    SubStream(std::uint64_t seed, std::uint64_t stream_id) : state_(derive(seed, stream_id)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // 53-bit uniform in [0,1)
    double next_u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

}  // namespace chains::rng
