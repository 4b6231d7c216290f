#pragma once

#include <cmath>
#include <cstdint>

namespace dra {

// Counter-based deterministic RNG. Streams are derived by hashing a seed with
// integer keys, so independent draws keyed by (iteration, recipient, sender)
// or by trial index never share mutable state and are reproducible across
// platforms (no standard-library distributions involved).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t bound = n * (UINT64_MAX / n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= bound);
        return x % n;
    }

    // Standard normal via Box-Muller.
    double gaussian() {
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t hash_mix(std::uint64_t h, std::uint64_t k) {
    h ^= k + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    SplitMix64 s(h);
    return s.next_u64();
}

// Derive an independent stream from a seed and up to four integer keys.
inline SplitMix64 keyed_stream(std::uint64_t seed, std::uint64_t k0 = 0, std::uint64_t k1 = 0,
                               std::uint64_t k2 = 0, std::uint64_t k3 = 0) {
    std::uint64_t h = hash_mix(seed, 0xD1B54A32D192ED03ULL);
    h = hash_mix(h, k0);
    h = hash_mix(h, k1);
    h = hash_mix(h, k2);
    h = hash_mix(h, k3);
    return SplitMix64(h);
}

}  // namespace dra
