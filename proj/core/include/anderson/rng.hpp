#pragma once

#include <cstdint>

#include "anderson/lattice.hpp"

namespace anderson {

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// One splitmix64 step applied to z; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) { return splitmix_finalize(z + 0x9e3779b97f4a7c15ULL); }

// Counter-based stream: the value depends only on (seed, stream, site), never on call order.
inline std::uint64_t hash_key(std::uint64_t seed, std::uint64_t stream, const Site& s) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ stream);
    h = mix64(h ^ static_cast<std::uint64_t>(s.x));
    h = mix64(h ^ static_cast<std::uint64_t>(s.y));
    h = mix64(h ^ static_cast<std::uint64_t>(s.z));
    return h;
}

// Uniform in the open interval (0, 1), 53-bit resolution.
inline double to_unit_open(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// Seed of Monte Carlo sample number `index` under a master seed.
inline std::uint64_t sample_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// Small sequential generator for test-instance construction; satisfies UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return splitmix_finalize(state_);
    }
    double uniform() { return to_unit_open((*this)()); }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

private:
    std::uint64_t state_;
};

}  // namespace anderson
